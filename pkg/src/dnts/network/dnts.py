import torch
from omegaconf import DictConfig, OmegaConf
from torch import Tensor, nn

from dnts.config import MODES, ModelConfig
from dnts.errors import UnknownModeError
from dnts.typing import ExampleInput, ForwardOutput, Hypergraph

from .decoder import CoefficientDecoder, activation_filter, synthesize
from .hypergraph_encoder import HypergraphEncoder
from .local_encoder import LocalEncoder
from .losses import loss_total
from .temporal import SignalGraphConv, SignalHead, TemporalConvolution


def fuse(h_local: Tensor, h_global: Tensor) -> Tensor:
    """Item-specific promoter representation: Concat(global, local)."""
    return torch.cat([h_global, h_local], dim=-1)


class DNTSModel(nn.Module):
    """Two-stage propagation-scale forecaster.

    mode
        s2p: self-sales forecast X_hat, coefficient matrix S_hat, y_hat = S_hat X_hat
        s2s: self-sales regression (no decoder)
        p2p: propagation-scale regression on historical propagation scale (no decoder)
    use_gcn=False drops both spatial encoders; H_hat is then the base embedding. In the single-stage modes
    use_gcn also convolves the input signal over the static graph of the input days.
    """

    def __init__(
        self,
        config: ModelConfig | DictConfig,
        num_promoters: int,
        num_items: int,
        window: int,
        horizon: int,
        mode: str = "s2p",
        use_gcn: bool = True,
    ):
        super().__init__()
        if mode not in MODES:
            raise UnknownModeError(f"unknown mode {mode!r}, expected one of {MODES}")
        if isinstance(config, DictConfig):
            config = OmegaConf.to_object(config)
        config.validate(window)
        self.cfg = config
        self.mode = mode
        self.use_gcn = use_gcn
        self.window = window
        self.horizon = horizon

        self.promoter_embedding = nn.Embedding(num_promoters, config.d_m)  # H0
        self.item_embedding: nn.Embedding | None = None  # R0
        self.local_encoder: LocalEncoder | None = None
        self.global_encoder: HypergraphEncoder | None = None
        if use_gcn:
            self.item_embedding = nn.Embedding(num_items, config.d_r)
            self.local_encoder = LocalEncoder(config.d_m, config.d_r, config.local_hidden, config.attention_hidden)
            self.global_encoder = HypergraphEncoder(
                config.d_m, config.d_r, config.global_hidden, config.attention_hidden
            )
            feature_dim = config.local_hidden + config.global_hidden
        else:
            feature_dim = config.d_m
        self.feature_dim = feature_dim

        temporal = TemporalConvolution(
            window, horizon, config.kernel_sizes, config.temporal_channels, config.temporal_layers
        )
        self.temporal: TemporalConvolution | None = None
        self.head: SignalHead | None = None
        self.decoder: CoefficientDecoder | None = None
        if mode == "s2p":
            self.temporal = temporal
            self.decoder = CoefficientDecoder(feature_dim, horizon, config.tau, config.hard_gate)
        else:
            graph_conv = SignalGraphConv(feature_dim, window, config.attention_hidden) if use_gcn else None
            self.head = SignalHead(temporal, feature_dim, graph_conv)
        self.initialize_weights()

    def initialize_weights(self):
        nn.init.uniform_(self.promoter_embedding.weight, -1.0, 1.0)
        if self.item_embedding is not None:
            nn.init.uniform_(self.item_embedding.weight, -1.0, 1.0)
        for m in (self.local_encoder, self.global_encoder, self.temporal, self.head, self.decoder):
            if m is not None:
                m.initialize_weights()

    @property
    def input_signal(self) -> str:
        return "propagation" if self.mode == "p2p" else "self_sales"

    @property
    def device(self) -> torch.device:
        return next(self.parameters()).device

    def global_encode(self, hypergraph: Hypergraph) -> Tensor:
        """[N, global_hidden] representation of every promoter; shared by examples with the same input days."""
        assert self.global_encoder is not None and self.item_embedding is not None
        return self.global_encoder(self.promoter_embedding.weight, self.item_embedding.weight, hypergraph)

    def encode(self, example: ExampleInput, global_repr: Tensor | None = None) -> Tensor:
        h = self.promoter_embedding(example.member_rows)
        if not self.use_gcn:
            return h
        assert self.local_encoder is not None and self.item_embedding is not None
        assert global_repr is not None, "global representation is required when the spatial encoders are enabled"
        r = self.item_embedding.weight[example.item_row]
        h_local = self.local_encoder(h, r, example.message_pairs, len(example.days))
        return fuse(h_local, global_repr[example.member_rows])

    def forward(
        self,
        example: ExampleInput,
        hypergraph: Hypergraph | None = None,
        global_repr: Tensor | None = None,
        noise: Tensor | None = None,
        generator: torch.Generator | None = None,
    ) -> ForwardOutput:
        if self.use_gcn and global_repr is None:
            assert hypergraph is not None, "either hypergraph or global_repr must be given"
            global_repr = self.global_encode(hypergraph)
        H_hat = self.encode(example, global_repr)

        if self.mode != "s2p":
            assert self.head is not None
            y_hat = self.head(example.signal, H_hat, example.message_pairs)
            X_hat = y_hat if self.mode == "s2s" else None
            return ForwardOutput(X_hat, H_hat, None, None, None, None, None, None, y_hat)

        assert self.temporal is not None and self.decoder is not None
        X_hat = self.temporal(example.signal)
        gate_logits, S_gate, S_ratio, S_hat, active_logits = self.decoder(H_hat, noise, generator)
        l_hat = torch.sigmoid(active_logits)
        S_filtered = activation_filter(S_hat, l_hat, self.cfg.delta)
        y_hat = synthesize(S_filtered, X_hat)
        return ForwardOutput(X_hat, H_hat, gate_logits, S_gate, S_ratio, S_filtered, active_logits, l_hat, y_hat)

    def target(self, example: ExampleInput) -> ExampleInput:
        """S->S regresses self-sales; the other modes regress propagation scale."""
        return example._replace(y=example.x) if self.mode == "s2s" else example

    def forward_train(
        self,
        example: ExampleInput,
        hypergraph: Hypergraph | None = None,
        global_repr: Tensor | None = None,
        noise: Tensor | None = None,
        generator: torch.Generator | None = None,
    ) -> tuple[Tensor, dict[str, Tensor], ForwardOutput]:
        output = self.forward(example, hypergraph, global_repr, noise, generator)
        loss, terms = loss_total(
            self.target(example),
            output,
            self.cfg.focal_alpha,
            self.cfg.focal_gamma,
            self.cfg.structure_target,
        )
        return loss, terms, output

    def set_temperature(self, tau: float):
        if self.decoder is not None:
            self.decoder.tau = tau
