"""StateSpace and SignalTrace dataclasses for pyresgen domain models."""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np


def _as_matrix(value, rows: Optional[int], cols: Optional[int], name: str) -> np.ndarray:
    """Convert a value to a 2-D float array, allowing empty blocks.

    Args:
        value: Array-like value or None for an empty block
        rows: Expected number of rows (None to infer)
        cols: Expected number of columns (None to infer)
        name: Field name used in error messages

    Returns:
        A 2-D float64 array

    Raises:
        ValueError: If the value is not two-dimensional
    """
    if value is None:
        return np.zeros((rows or 0, cols or 0))
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 2:
        return arr.copy()
    if arr.size == 0:
        return np.zeros((rows or 0, cols or 0))
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ValueError(f"Matrix '{name}' must be two-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Continuous-time LTI realization x' = Ax + Bu, y = Cx + Du.

    Attributes:
        A: State matrix (n x n)
        B: Input matrix (n x m)
        C: Output matrix (p x n)
        D: Feedthrough matrix (p x m)
        input_labels: Optional names for the m input channels
        output_labels: Optional names for the p output channels
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    input_labels: Optional[Tuple[str, ...]] = None
    output_labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        A = _as_matrix(self.A, None, None, "A")
        n = A.shape[0]
        B = _as_matrix(self.B, n, 0, "B")
        C = _as_matrix(self.C, 0, n, "C")
        D = _as_matrix(self.D, C.shape[0], B.shape[1], "D")
        if self.D is None:
            D = np.zeros((C.shape[0], B.shape[1]))

        if A.shape != (n, n):
            raise ValueError(f"Matrix 'A' must be square, got shape {A.shape}")
        if B.shape[0] != n:
            raise ValueError(f"Matrix 'B' must have {n} rows, got shape {B.shape}")
        if C.shape[1] != n:
            raise ValueError(f"Matrix 'C' must have {n} columns, got shape {C.shape}")
        if D.shape != (C.shape[0], B.shape[1]):
            raise ValueError(
                f"Matrix 'D' must have shape {(C.shape[0], B.shape[1])}, got {D.shape}"
            )
        for name, mat in (("A", A), ("B", B), ("C", C), ("D", D)):
            if not np.all(np.isfinite(mat)):
                raise ValueError(f"Matrix '{name}' contains non-finite entries")
        if self.input_labels is not None and len(self.input_labels) != B.shape[1]:
            raise ValueError(f"Field 'input_labels' must have {B.shape[1]} entries")
        if self.output_labels is not None and len(self.output_labels) != C.shape[0]:
            raise ValueError(f"Field 'output_labels' must have {C.shape[0]} entries")

        for name, mat in (("A", A), ("B", B), ("C", C), ("D", D)):
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)
        if self.input_labels is not None:
            object.__setattr__(self, "input_labels", tuple(self.input_labels))
        if self.output_labels is not None:
            object.__setattr__(self, "output_labels", tuple(self.output_labels))

    @property
    def nstates(self) -> int:
        """Number of states n."""
        return self.A.shape[0]

    @property
    def ninputs(self) -> int:
        """Number of inputs m."""
        return self.B.shape[1]

    @property
    def noutputs(self) -> int:
        """Number of outputs p."""
        return self.C.shape[0]

    def select(
        self,
        outputs: Optional[Sequence[int]] = None,
        inputs: Optional[Sequence[int]] = None,
    ) -> "StateSpace":
        """Return the sub-system from a subset of inputs to a subset of outputs.

        The state is kept as is; the result is generally not minimal.

        Args:
            outputs: Output indices to keep, in the given order (None keeps all)
            inputs: Input indices to keep, in the given order (None keeps all)

        Returns:
            The selected StateSpace
        """
        out_idx = np.arange(self.noutputs) if outputs is None else np.asarray(outputs, dtype=int)
        in_idx = np.arange(self.ninputs) if inputs is None else np.asarray(inputs, dtype=int)
        in_labels = None
        out_labels = None
        if self.input_labels is not None:
            in_labels = tuple(self.input_labels[i] for i in in_idx)
        if self.output_labels is not None:
            out_labels = tuple(self.output_labels[i] for i in out_idx)
        return StateSpace(
            A=self.A,
            B=self.B[:, in_idx].reshape(self.nstates, len(in_idx)),
            C=self.C[out_idx, :].reshape(len(out_idx), self.nstates),
            D=self.D[np.ix_(out_idx, in_idx)].reshape(len(out_idx), len(in_idx)),
            input_labels=in_labels,
            output_labels=out_labels,
        )

    def with_labels(
        self,
        input_labels: Optional[Sequence[str]] = None,
        output_labels: Optional[Sequence[str]] = None,
    ) -> "StateSpace":
        """Return a copy carrying the given port names."""
        return StateSpace(
            A=self.A,
            B=self.B,
            C=self.C,
            D=self.D,
            input_labels=tuple(input_labels) if input_labels is not None else self.input_labels,
            output_labels=tuple(output_labels) if output_labels is not None else self.output_labels,
        )

    def to_dict(self) -> dict:
        """Serialize the realization to plain lists for JSON storage."""
        return {
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
            "shape": [self.nstates, self.ninputs, self.noutputs],
            "input_labels": list(self.input_labels) if self.input_labels else None,
            "output_labels": list(self.output_labels) if self.output_labels else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StateSpace":
        """Rebuild a realization written by to_dict."""
        n, m, p = data["shape"]
        return cls(
            A=np.asarray(data["A"], dtype=float).reshape(n, n),
            B=np.asarray(data["B"], dtype=float).reshape(n, m),
            C=np.asarray(data["C"], dtype=float).reshape(p, n),
            D=np.asarray(data["D"], dtype=float).reshape(p, m),
            input_labels=data.get("input_labels"),
            output_labels=data.get("output_labels"),
        )


@dataclass(frozen=True, eq=False)
class SignalTrace:
    """Uniformly sampled multichannel signal.

    Attributes:
        step: Sampling period in seconds
        samples: Array of shape (num_steps, channels)
        start: Time of the first sample in seconds
        labels: Optional channel names
    """

    step: float
    samples: np.ndarray
    start: float = 0.0
    labels: Optional[Tuple[str, ...]] = field(default=None)

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"Field 'step' must be positive, got {self.step}")
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim == 1:
            samples = samples.reshape(-1, 1)
        if samples.ndim != 2:
            raise ValueError(f"Field 'samples' must be two-dimensional, got shape {samples.shape}")
        if self.labels is not None:
            if len(self.labels) != samples.shape[1]:
                raise ValueError(f"Field 'labels' must have {samples.shape[1]} entries")
            object.__setattr__(self, "labels", tuple(self.labels))
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def channels(self) -> int:
        """Number of channels."""
        return self.samples.shape[1]

    @property
    def num_steps(self) -> int:
        """Number of samples."""
        return self.samples.shape[0]

    @property
    def times(self) -> np.ndarray:
        """Sample instants in seconds."""
        return self.start + self.step * np.arange(self.num_steps)

    @classmethod
    def constant(cls, value: Sequence[float], num_steps: int, step: float) -> "SignalTrace":
        """Build a trace holding a constant vector for num_steps samples."""
        row = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(step=step, samples=np.tile(row, (num_steps, 1)))
