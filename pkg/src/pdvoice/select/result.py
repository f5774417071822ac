"""Selection outcome shared by all selectors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SelectionResult:
    """Boolean mask over columns plus per-feature scores and the search trace.

    ``trace`` holds ``(key, score)`` pairs sorted by key: subset size for
    SFS/RFECV, lambda for LASSO, feature rank for the filter.
    """

    method: str
    column_names: tuple
    mask: np.ndarray
    scores: np.ndarray
    trace: tuple = ()
    flags: tuple = ()
    seed: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != (len(self.column_names),):
            raise ValueError("mask length must equal the number of columns")
        if not mask.any():
            raise ValueError("a selection must keep at least one feature")
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "scores", np.asarray(self.scores, dtype=np.float64))
        object.__setattr__(self, "column_names", tuple(self.column_names))

    @property
    def selected(self) -> list:
        return [n for n, keep in zip(self.column_names, self.mask) if keep]

    def to_text(self, extra: dict | None = None) -> str:
        lines = [f"method: {self.method}", f"seed: {self.seed}"]
        for k, v in sorted({**self.params, **(extra or {})}.items()):
            lines.append(f"{k}: {v}")
        lines.append(f"n_selected: {int(self.mask.sum())} of {self.mask.size}")
        lines.append("selected:")
        lines += [f"  {n}" for n in self.selected]
        lines.append("scores:")
        lines += [f"  {n}\t{s!r}" for n, s in zip(self.column_names, self.scores.tolist())]
        lines.append("trace:")
        lines += [f"  {k!r}\t{s!r}" for k, s in self.trace]
        if self.flags:
            lines.append("flags:")
            lines += [f"  {f}" for f in self.flags]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SelectionResult":
        """Parse the mask, scores and trace back from :meth:`to_text` output."""
        section, head, names, scores, selected, trace, flags = None, {}, [], [], set(), [], []
        for line in text.splitlines():
            if not line.startswith("  "):
                key, _, val = line.partition(":")
                section = key if not val.strip() else None
                if val.strip():
                    head[key] = val.strip()
                continue
            item = line[2:]
            if section == "selected":
                selected.add(item)
            elif section == "scores":
                n, s = item.split("\t")
                names.append(n)
                scores.append(float(s))
            elif section == "trace":
                k, s = item.split("\t")
                trace.append((float(k), float(s)))
            elif section == "flags":
                flags.append(item)
        seed = head.get("seed")
        return cls(
            head["method"],
            names,
            [n in selected for n in names],
            scores,
            tuple(trace),
            tuple(flags),
            None if seed in (None, "None") else int(seed),
        )
