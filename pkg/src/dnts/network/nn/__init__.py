from torch.nn import GRUCell as gru_cell

from .layers import AttentionAggregation, GRUSequence, InceptionConv
from .ops import attention_aggregate, conv1d_bank, gumbel_binary, logistic_noise, masked_mean, masked_sum
