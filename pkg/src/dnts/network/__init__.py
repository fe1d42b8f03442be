from . import nn
from .builder import build_model
from .decoder import CoefficientDecoder, activation_filter, synthesize
from .dnts import DNTSModel, fuse
from .hypergraph_encoder import HypergraphEncoder
from .local_encoder import LocalEncoder
from .losses import focal_loss, loss_aux, loss_main, loss_total, msle
from .temporal import SignalGraphConv, SignalHead, TemporalConvolution
