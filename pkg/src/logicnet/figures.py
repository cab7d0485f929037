"""Figure rendering for the report paths of the CLI.

Rendering is headless and byte-deterministic: the Agg backend, a fixed dpi,
and no software/date metadata in the PNG, so rerunning a command reproduces
the figure files exactly.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150
_PNG_METADATA = {"Software": None}

# cap the number of input columns drawn in circuit heatmaps
_MAX_TRACE_COLUMNS = 1024


def _save(fig, path) -> None:
    fig.savefig(path, dpi=_DPI, metadata=_PNG_METADATA)
    plt.close(fig)


def capacity_figure(reports: Sequence, path) -> None:
    """Subsets tried per universe size, colored by the representability verdict."""
    ns = [r.n for r in reports]
    tested = [r.subsets_tested for r in reports]
    colors = ["#c0392b" if not r.representable else "#27ae60" for r in reports]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([str(n) for n in ns], tested, color=colors)
    ax.set_xlabel("atoms n")
    ax.set_ylabel("subsets tested")
    w = reports[0].w if reports else 0
    ax.set_title(f"counting to {w + 1} with width {w}: red = not representable")
    fig.tight_layout()
    _save(fig, path)


def circuit_figure(circuit, path) -> None:
    """Node-bit trace heatmap: rows are (layer, node, bit), columns inputs."""
    matrix = circuit.trace_matrix().T
    if matrix.shape[1] > _MAX_TRACE_COLUMNS:
        matrix = matrix[:, :_MAX_TRACE_COLUMNS]
    fig, ax = plt.subplots(figsize=(8, max(2.0, 0.25 * matrix.shape[0])))
    ax.imshow(matrix, aspect="auto", interpolation="nearest", cmap="Greys")
    ax.set_xlabel("input index")
    ax.set_ylabel("trace bit")
    labels = [f"L{j}N{k}B{i}" for (j, k, i) in circuit.trace_keys]
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels(labels, fontsize=6)
    ax.set_title(
        f"trace bits of a depth-{circuit.net.depth} width-{circuit.net.width} net"
    )
    fig.tight_layout()
    _save(fig, path)


def pipeline_figure(traces: Sequence, path) -> None:
    """Residual per step above the selected-token sequence."""
    steps = np.arange(1, len(traces) + 1)
    residuals = [t.hallucination_residual for t in traces]
    selected = [t.selected_token for t in traces]
    fig, (ax_r, ax_t) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    ax_r.plot(steps, residuals, marker="o", color="#c0392b")
    ax_r.set_ylabel("hallucination residual")
    ax_t.step(steps, selected, where="mid", color="#2c3e50")
    ax_t.set_ylabel("selected token")
    ax_t.set_xlabel("step")
    fig.tight_layout()
    _save(fig, path)


def metaphor_figure(reports: Sequence, path) -> None:
    """Hallucination score per approximation target."""
    names = [r.target_id for r in reports]
    scores = [r.rms_score for r in reports]
    colors = ["#27ae60" if r.in_span else "#c0392b" for r in reports]
    fig, ax = plt.subplots(figsize=(max(5.0, 0.8 * len(names)), 4))
    ax.bar(range(len(names)), scores, color=colors)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("rms residual")
    ax.set_title("approximation hallucination scores (green = in span)")
    fig.tight_layout()
    _save(fig, path)
