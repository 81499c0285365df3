"""
Synthetic MOOC courses: a seeded student simulator with controllable
difficulty, pacing and cross-course shift.
"""

from .course import PRESETS, ShiftSpec, SyntheticCourseSpec, load_course_spec, preset, preset_pace, preset_shift, scaled, shift
from .simulator import SimulationResult, curriculum, generate, simulate, simulate_student
from .calibration import calibrate, graduation_rate
