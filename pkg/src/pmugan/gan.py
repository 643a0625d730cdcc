"""Weight-clipped Wasserstein GAN over fixed-length phasor sequences.

The generator is a bank of parallel dense heads (one per channel, two for
magnitude/phase records) sharing a single Gaussian noise input. The critic
consumes the concatenated channels and emits one score. Training alternates
k clipped critic updates with one generator update, both on RMSProp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .datasets import matrix_to_records, records_to_matrix
from .errors import ConfigurationError, TrainingDivergedError
from .network import (
    NetworkParameters,
    NetworkSpec,
    OptimizerState,
    backward,
    clip_params,
    forward,
    init_network,
    rmsprop_step,
)
from .swing import PmuRecord

CRITIC_OUTPUTS = ("linear", "sigmoid")


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64
    critic_steps: int = 5
    clip: float = 0.01
    learning_rate: float = 1e-4
    iterations: int = 20_000
    noise_dim: int = 32
    seed: int = 0
    n_channels: int = 2
    generator_hidden: tuple = (64, 128)
    critic_hidden: tuple = (128, 64)
    critic_output: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "generator_hidden", tuple(self.generator_hidden))
        object.__setattr__(self, "critic_hidden", tuple(self.critic_hidden))
        checks = [
            ("batch_size", self.batch_size >= 1),
            ("critic_steps", self.critic_steps >= 1),
            ("clip", self.clip > 0),
            ("learning_rate", self.learning_rate > 0),
            ("iterations", self.iterations >= 1),
            ("noise_dim", self.noise_dim >= 1),
            ("n_channels", self.n_channels >= 1),
        ]
        for name, ok in checks:
            if not ok:
                raise ConfigurationError(f"invalid {name}: {getattr(self, name)}")
        if self.critic_output not in CRITIC_OUTPUTS:
            raise ConfigurationError(
                f"critic_output must be one of {CRITIC_OUTPUTS}, got {self.critic_output!r}"
            )


@dataclass
class GeneratorModel:
    """Parallel heads over one shared noise vector; one head per output channel."""

    head_spec: NetworkSpec
    heads: list

    @property
    def n_heads(self) -> int:
        return len(self.heads)

    @property
    def seq_len(self) -> int:
        return self.head_spec.output_size

    def forward(self, noise: np.ndarray):
        """Concatenated head outputs (n, n_heads*seq_len) plus per-head caches."""
        outputs, caches = [], []
        for params in self.heads:
            out, cache = forward(params, self.head_spec, noise)
            outputs.append(out)
            caches.append(cache)
        return np.concatenate(outputs, axis=1), caches


@dataclass
class CriticModel:
    spec: NetworkSpec
    params: NetworkParameters

    @property
    def input_size(self) -> int:
        return self.spec.input_size

    def score(self, batch: np.ndarray) -> np.ndarray:
        out, _ = forward(self.params, self.spec, batch)
        return out[:, 0]


# The critic consumes the unit-interval representation shifted by -0.5.
# Relu kinks sit at zero, so on a positive-only input every first-layer unit
# is active (or dead) across the whole data support and its bias gradient
# cancels between the real and fake expectations; the critic then stalls as
# an affine function once the means match. Centering puts the kinks inside
# the support and breaks that degeneracy.
CRITIC_INPUT_OFFSET = 0.5


def _critic_input(batch: np.ndarray) -> np.ndarray:
    return batch - CRITIC_INPUT_OFFSET


@dataclass(frozen=True)
class ChannelScaler:
    """Per-channel min-max map onto [lo, hi], invertible, fitted once on real data."""

    mins: tuple
    maxs: tuple
    seq_len: int
    lo: float = 0.05
    hi: float = 0.95

    def __post_init__(self):
        object.__setattr__(self, "mins", tuple(float(v) for v in self.mins))
        object.__setattr__(self, "maxs", tuple(float(v) for v in self.maxs))
        if len(self.mins) != len(self.maxs):
            raise ConfigurationError("mins and maxs must pair up")
        if not self.lo < self.hi:
            raise ConfigurationError(f"need lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def n_channels(self) -> int:
        return len(self.mins)

    @classmethod
    def fit(cls, matrix: np.ndarray, n_channels: int, lo: float = 0.05, hi: float = 0.95):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[1] % n_channels != 0:
            raise ConfigurationError(
                f"matrix shape {matrix.shape} does not split into {n_channels} channels"
            )
        seq_len = matrix.shape[1] // n_channels
        mins, maxs = [], []
        for c in range(n_channels):
            block = matrix[:, c * seq_len : (c + 1) * seq_len]
            mins.append(block.min())
            maxs.append(block.max())
        return cls(mins=mins, maxs=maxs, seq_len=seq_len, lo=lo, hi=hi)

    def _spans(self):
        return [mx - mn if mx > mn else 1.0 for mn, mx in zip(self.mins, self.maxs)]

    def transform(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=float)
        out = np.empty_like(matrix)
        for c, (mn, span) in enumerate(zip(self.mins, self._spans())):
            block = matrix[:, c * self.seq_len : (c + 1) * self.seq_len]
            out[:, c * self.seq_len : (c + 1) * self.seq_len] = (
                self.lo + (block - mn) / span * (self.hi - self.lo)
            )
        return out

    def inverse(self, scaled: np.ndarray) -> np.ndarray:
        scaled = np.asarray(scaled, dtype=float)
        out = np.empty_like(scaled)
        for c, (mn, span) in enumerate(zip(self.mins, self._spans())):
            block = scaled[:, c * self.seq_len : (c + 1) * self.seq_len]
            out[:, c * self.seq_len : (c + 1) * self.seq_len] = (
                mn + (block - self.lo) / (self.hi - self.lo) * span
            )
        return out


@dataclass
class Checkpoint:
    config: TrainConfig
    generator: GeneratorModel
    critic: CriticModel
    gen_opt: list
    critic_opt: OptimizerState
    iteration: int
    rng_state: dict
    scaler: ChannelScaler
    dt: float

    def __post_init__(self):
        if not 0 <= self.iteration <= self.config.iterations:
            raise ConfigurationError(
                f"iteration {self.iteration} outside [0, {self.config.iterations}]"
            )


@dataclass
class LossHistory:
    critic: list = field(default_factory=list)
    generator: list = field(default_factory=list)

    def append(self, critic_value: float, generator_value: float):
        self.critic.append(critic_value)
        self.generator.append(generator_value)

    def __len__(self) -> int:
        return len(self.critic)


def sample_noise(n: int, noise_dim: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1 or noise_dim < 1:
        raise ConfigurationError(f"need n, noise_dim >= 1, got {n}, {noise_dim}")
    return rng.standard_normal((n, noise_dim))


def build_generator(config: TrainConfig, seq_len: int, rng: np.random.Generator) -> GeneratorModel:
    spec = NetworkSpec(
        (config.noise_dim, *config.generator_hidden, seq_len),
        ("relu",) * len(config.generator_hidden) + ("sigmoid",),
    )
    return GeneratorModel(
        head_spec=spec, heads=[init_network(spec, rng) for _ in range(config.n_channels)]
    )


def build_critic(config: TrainConfig, seq_len: int, rng: np.random.Generator) -> CriticModel:
    spec = NetworkSpec(
        (config.n_channels * seq_len, *config.critic_hidden, 1),
        ("relu",) * len(config.critic_hidden) + (config.critic_output,),
    )
    return CriticModel(spec=spec, params=init_network(spec, rng))


def critic_objective(critic: CriticModel, real_batch: np.ndarray, fake_batch: np.ndarray) -> float:
    """mean D(real) - mean D(fake): the empirical Wasserstein estimate."""
    real_batch = np.asarray(real_batch, dtype=float)
    fake_batch = np.asarray(fake_batch, dtype=float)
    if real_batch.shape != fake_batch.shape:
        raise ConfigurationError(
            f"batch shapes differ: {real_batch.shape} vs {fake_batch.shape}"
        )
    return float(
        critic.score(_critic_input(real_batch)).mean()
        - critic.score(_critic_input(fake_batch)).mean()
    )


def generator_objective(critic: CriticModel, fake_batch: np.ndarray) -> float:
    """-mean D(fake): what the generator update minimizes."""
    return float(-critic.score(_critic_input(np.asarray(fake_batch, dtype=float))).mean())


def _critic_update(critic, critic_opt, generator, data, config, rng):
    """One clipped critic step on fresh real/noise mini-batches."""
    n = config.batch_size
    idx = rng.integers(0, data.shape[0], size=n)
    real = data[idx]
    noise = sample_noise(n, config.noise_dim, rng)
    fake, _ = generator.forward(noise)

    real_out, real_cache = forward(critic.params, critic.spec, _critic_input(real))
    fake_out, fake_cache = forward(critic.params, critic.spec, _critic_input(fake))
    value = float(real_out.mean() - fake_out.mean())

    # minimize (1/n) sum(-D(real) + D(fake))
    grad_real, _ = backward(
        critic.params, critic.spec, real_cache, np.full_like(real_out, -1.0 / n)
    )
    grad_fake, _ = backward(
        critic.params, critic.spec, fake_cache, np.full_like(fake_out, 1.0 / n)
    )
    grads = NetworkParameters(
        [a + b for a, b in zip(grad_real.weights, grad_fake.weights)],
        [a + b for a, b in zip(grad_real.biases, grad_fake.biases)],
    )
    new_params, critic_opt = rmsprop_step(critic.params, grads, critic_opt, config.learning_rate)
    critic = CriticModel(spec=critic.spec, params=clip_params(new_params, config.clip))
    return critic, critic_opt, value


def _generator_update(generator, gen_opt, critic, config, rng):
    """One generator step: push fake scores up through the frozen critic."""
    n = config.batch_size
    noise = sample_noise(n, config.noise_dim, rng)
    fake, caches = generator.forward(noise)
    fake_out, fake_cache = forward(critic.params, critic.spec, _critic_input(fake))
    value = float(-fake_out.mean())

    # minimize (1/n) sum(-D(G(z)))
    _, grad_fake = backward(
        critic.params, critic.spec, fake_cache, np.full_like(fake_out, -1.0 / n)
    )
    seq_len = generator.seq_len
    new_heads, new_opts = [], []
    for h, (params, cache, opt) in enumerate(zip(generator.heads, caches, gen_opt)):
        grads, _ = backward(
            params, generator.head_spec, cache, grad_fake[:, h * seq_len : (h + 1) * seq_len]
        )
        params, opt = rmsprop_step(params, grads, opt, config.learning_rate)
        new_heads.append(params)
        new_opts.append(opt)
    generator = GeneratorModel(head_spec=generator.head_spec, heads=new_heads)
    return generator, new_opts, value


def train_iteration(state: Checkpoint, data: np.ndarray, rng: np.random.Generator,
                    on_critic_update=None):
    """k clipped critic updates on fresh mini-batches, then one generator update."""
    config = state.config
    critic, critic_opt = state.critic, state.critic_opt
    generator, gen_opt = state.generator, state.gen_opt
    critic_value = math.nan
    for j in range(config.critic_steps):
        critic, critic_opt, critic_value = _critic_update(
            critic, critic_opt, generator, data, config, rng
        )
        if on_critic_update is not None:
            on_critic_update(state.iteration, j, critic.params)
    generator, gen_opt, gen_value = _generator_update(generator, gen_opt, critic, config, rng)

    if not (math.isfinite(critic_value) and math.isfinite(gen_value)):
        raise TrainingDivergedError(state.iteration)

    new_state = Checkpoint(
        config=config,
        generator=generator,
        critic=critic,
        gen_opt=gen_opt,
        critic_opt=critic_opt,
        iteration=state.iteration + 1,
        rng_state=rng.bit_generator.state,
        scaler=state.scaler,
        dt=state.dt,
    )
    return new_state, critic_value, gen_value


def _coerce_data(data, dt: float):
    """Accept either a raw (n, width) matrix or a list of records.

    Records carry their own dt, which then overrides the argument.
    """
    if isinstance(data, np.ndarray):
        matrix = np.asarray(data, dtype=float)
        if matrix.ndim != 2:
            raise ConfigurationError(f"training data must be 2-d, got shape {matrix.shape}")
        return matrix, dt
    records = list(data)
    if not records:
        raise ConfigurationError("no records to train on")
    return records_to_matrix(records), records[0].dt


def initial_checkpoint(data, config: TrainConfig, dt: float = 1.0 / 60.0) -> Checkpoint:
    """Fresh models, fresh optimizer state, scaler fitted on the training data."""
    matrix, dt = _coerce_data(data, dt)
    if matrix.shape[1] % config.n_channels != 0:
        raise ConfigurationError(
            f"width {matrix.shape[1]} does not split into {config.n_channels} channels"
        )
    seq_len = matrix.shape[1] // config.n_channels
    rng = np.random.default_rng(config.seed)
    generator = build_generator(config, seq_len, rng)
    critic = build_critic(config, seq_len, rng)
    return Checkpoint(
        config=config,
        generator=generator,
        critic=critic,
        gen_opt=[OptimizerState.for_params(p) for p in generator.heads],
        critic_opt=OptimizerState.for_params(critic.params),
        iteration=0,
        rng_state=rng.bit_generator.state,
        scaler=ChannelScaler.fit(matrix, config.n_channels),
        dt=dt,
    )


def _restore_rng(state_dict: dict) -> np.random.Generator:
    rng = np.random.default_rng(0)
    rng.bit_generator.state = state_dict
    return rng


def train(
    data,
    config: TrainConfig,
    dt: float = 1.0 / 60.0,
    resume: Checkpoint | None = None,
    on_critic_update=None,
    history: LossHistory | None = None,
    log_every: int = 0,
):
    """Run config.iterations alternating updates; resumable from a checkpoint.

    Resuming after n iterations and continuing to n+m reproduces the
    uninterrupted n+m run bit for bit: the RNG state rides in the checkpoint.
    """
    matrix, dt = _coerce_data(data, dt)
    if matrix.shape[0] < config.batch_size:
        raise ConfigurationError(
            f"dataset size {matrix.shape[0]} < batch size {config.batch_size}"
        )
    if resume is None:
        state = initial_checkpoint(matrix, config, dt)
    else:
        if replace(resume.config, iterations=config.iterations) != config:
            raise ConfigurationError("resume checkpoint config differs beyond iterations")
        state = Checkpoint(
            config=config,
            generator=resume.generator,
            critic=resume.critic,
            gen_opt=resume.gen_opt,
            critic_opt=resume.critic_opt,
            iteration=resume.iteration,
            rng_state=resume.rng_state,
            scaler=resume.scaler,
            dt=resume.dt,
        )
    scaled = state.scaler.transform(matrix)
    rng = _restore_rng(state.rng_state)
    history = history if history is not None else LossHistory()
    while state.iteration < config.iterations:
        state, critic_value, gen_value = train_iteration(state, scaled, rng, on_critic_update)
        history.append(critic_value, gen_value)
        if log_every and state.iteration % log_every == 0:
            print(
                f"iter {state.iteration}/{config.iterations} "
                f"critic {critic_value:+.6f} gen {gen_value:+.6f}"
            )
    return state, history


def sample_matrix(checkpoint: Checkpoint, n: int, rng: np.random.Generator) -> np.ndarray:
    """n generated rows in data units (scaler inverted), no clamping."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    noise = sample_noise(n, checkpoint.config.noise_dim, rng)
    scaled, _ = checkpoint.generator.forward(noise)
    return checkpoint.scaler.inverse(scaled)


def generate(checkpoint: Checkpoint, n: int, rng: np.random.Generator) -> list:
    """n raw synthetic records (no filtering); magnitudes floored at zero."""
    if checkpoint.config.n_channels != 2:
        raise ConfigurationError(
            "records need exactly 2 channels (magnitude, phase); "
            f"checkpoint has {checkpoint.config.n_channels}"
        )
    matrix = sample_matrix(checkpoint, n, rng)
    return matrix_to_records(matrix, dt=checkpoint.dt, source_tag="synthetic")


def wasserstein_1d(samples_a, samples_b) -> float:
    """W1 between equal-size multisets: mean |sorted a - sorted b|."""
    a = np.asarray(samples_a, dtype=float).ravel()
    b = np.asarray(samples_b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ConfigurationError("both sample sets must be nonempty")
    if a.size != b.size:
        raise ConfigurationError(f"sample sets differ in size: {a.size} vs {b.size}")
    return float(np.abs(np.sort(a) - np.sort(b)).mean())
