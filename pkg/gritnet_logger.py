# gritnet_logger.py
from typing import Any, Dict, Mapping

from log.logger import get_logger

# Order in which run coordinates appear in a message prefix
SCOPE_ORDER = ("course", "seed", "fold", "week", "theta", "epoch")


def format_scope(scope: Mapping[str, Any]) -> str:
    """``[course=nd_b seed=0 fold=2] `` for the set coordinates, '' if none are set."""
    fields = {k: v for k, v in scope.items() if v is not None}
    if not fields:
        return ""
    keys = [k for k in SCOPE_ORDER if k in fields] + sorted(k for k in fields if k not in SCOPE_ORDER)
    return "[" + " ".join(f"{k}={fields[k]}" for k in keys) + "] "


class GritNetLogger:
    """Mixin that gives the training, adaptation and experiment drivers
    indented logging helpers tagged with run coordinates.

    ``log_section`` opens a section and sets its scope (course, seed, ...);
    every later message is prefixed with that scope plus whatever
    coordinates the call itself passes, e.g.
    ``self.log_info("AUC=71.2", indent=1, fold=2, week=3)``.

    Subclasses set ``self.logger`` (usually ``get_logger("<Component>")``);
    if they do not, the root application logger is used.
    """

    logger = None
    _section_scope: Dict[str, Any] = {}

    def _get_logger(self):
        if self.logger is None:
            self.logger = get_logger()
        return self.logger

    @property
    def section_scope(self) -> Dict[str, Any]:
        return dict(self._section_scope)

    def _emit(self, level: str, message, indent: int, scope: Mapping[str, Any]) -> None:
        prefix = format_scope({**self._section_scope, **scope})
        getattr(self._get_logger(), level)(f"{prefix}{'  ' * indent}{message}")

    def log_info(self, message, indent=0, **scope):
        self._emit("info", message, indent, scope)

    def log_debug(self, message, indent=0, **scope):
        self._emit("debug", message, indent, scope)

    def log_error(self, message, indent=0, **scope):
        self._emit("error", message, indent, scope)

    def log_warning(self, message, indent=0, **scope):
        self._emit("warning", message, indent, scope)

    def log_section(self, title, width=80, **scope):
        """
        Log a banner framed by '=' lines and make ``scope`` the section's coordinates.

        The previous section's coordinates are dropped, not merged.
        """
        self._section_scope = {k: v for k, v in scope.items() if v is not None}
        logger = self._get_logger()
        logger.info("=" * width)
        logger.info(f"{format_scope(self._section_scope)}{title}")
        logger.info("=" * width)
