from .features import FEATURE_NAMES, NUM_FEATURES, featurize, featurize_all
from .logreg import LogRegModel, load_logreg, logreg_loss_and_grad, predict, save_logreg, train_logreg
