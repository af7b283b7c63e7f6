"""The four codes behind one interface, for the harness and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .channels import HAMMING_STRATEGIES, INSDEL_STRATEGIES, corrupt_hamming, corrupt_insdel
from .hamming_paldc import PaldcParams, SecretKey, paldc_dec, paldc_enc, paldc_gen
from .insdel_compiler import CompilerParams, compiled_dec, enc_compile, validate_params
from .resource_bounded import RaldcParams, raldc_dec, raldc_enc

CODE_NAMES = ("paldc", "insdel_paldc", "raldc_hamming", "raldc_insdel")


@dataclass(frozen=True)
class CompilerKnobs:
    """Compiler settings that do not depend on the codeword length."""

    tau: int = 32
    gamma: float = 0.1
    theta: float = 0.05
    pad_rate: float = 0.25
    idx_bits: int = 32
    lambda0: int = 16
    w_lo: float = 1 / 3
    buffer_thresh: float = 0.25
    c_w: int = 2
    c_N: float = 1.0
    n_min: int = 9
    h_delta: float = 1 / 16

    def build(self, m: int, t: int) -> CompilerParams:
        return CompilerParams(m=m, t=t, **self.__dict__)


@dataclass(frozen=True)
class Code:
    name: str
    paldc: PaldcParams = field(default_factory=PaldcParams)
    knobs: CompilerKnobs = field(default_factory=CompilerKnobs)
    T: int = 1 << 14
    copies: int = 9
    sample_copies: int = 5

    def __post_init__(self):
        if self.name not in CODE_NAMES:
            from .errors import InvalidInput
            raise InvalidInput(f"unknown code {self.name!r}; choose from {', '.join(CODE_NAMES)}")

    @property
    def insdel(self) -> bool:
        return self.name.endswith("insdel") or self.name == "insdel_paldc"

    @property
    def keyed(self) -> bool:
        return self.name in ("paldc", "insdel_paldc")

    @property
    def strategies(self) -> tuple[str, ...]:
        return INSDEL_STRATEGIES if self.insdel else HAMMING_STRATEGIES

    @property
    def k(self) -> int:
        return self.paldc.k

    @property
    def raldc(self) -> RaldcParams:
        return RaldcParams(self.paldc, self.T, self.copies, self.sample_copies)

    @property
    def hamming_len(self) -> int:
        return self.raldc.n if self.name.startswith("raldc") else self.paldc.m

    @property
    def compiler(self) -> CompilerParams:
        return self.knobs.build(self.hamming_len, self.paldc.t)

    @property
    def n(self) -> int:
        return self.compiler.codeword_len if self.insdel else self.hamming_len

    def with_k(self, k: int) -> "Code":
        return replace(self, paldc=replace(self.paldc, k=k))

    def problems(self) -> list[str]:
        out = list(self.paldc.problems())
        if self.insdel and not out:
            out += validate_params(self.compiler)
        return out

    # -- operations -------------------------------------------------------

    def gen(self, seed: bytes) -> SecretKey | None:
        return paldc_gen(self.paldc, seed) if self.keyed else None

    def encode(self, x, key: SecretKey | None, seed: bytes) -> np.ndarray:
        if self.keyed:
            y = paldc_enc(key, x, self.paldc)
        else:
            y = raldc_enc(x, self.raldc, seed)
        return enc_compile(y, self.compiler) if self.insdel else y

    def corrupt(self, word, delta: float, strategy: str, seed: int):
        """Corrupted word and, for insdel codes, the edit script."""
        if self.insdel:
            cp = self.compiler
            return corrupt_insdel(word, delta, strategy, seed, layout=(cp.blk_len, cp.block.buffer_len))
        return corrupt_hamming(word, delta, strategy, seed, block_bits=self.paldc.coded_bits), None

    def decode(self, oracle, L: int, R: int, key: SecretKey | None,
               rng: np.random.Generator, trace: dict | None = None) -> np.ndarray:
        if self.keyed:
            def inner(o):
                return paldc_dec(key, o, L, R, self.paldc)
        else:
            def inner(o):
                return raldc_dec(o, L, R, self.raldc, rng, trace)
        if self.insdel:
            return compiled_dec(oracle, inner, self.compiler, rng, trace)
        return inner(oracle)
