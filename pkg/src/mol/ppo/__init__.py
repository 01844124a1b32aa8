from .gradcheck import GradCheckReport, gradient_check, ppo_gradient_check
from .learner import Batch, LossStats, PPOLearner, TrainerConfig, TrainingFault, nstep_returns, ppo_loss
from .networks import MLP, CorruptedModelError, PolicyNetwork, ValueNetwork
from .optim import Adam
