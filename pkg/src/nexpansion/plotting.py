"""Static figures written next to the CSV / text output of the CLI."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _min_max_ticks(ax, xs, ys):
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(ys), max(ys)
    ax.set_xticks([xlo, xhi])
    ax.set_xticklabels([f"{xlo:.6g}", f"{xhi:.6g}"])
    ax.set_yticks([ylo, yhi] if yhi > ylo else [ylo])
    ax.set_yticklabels([f"{v:.6g}" for v in ([ylo, yhi] if yhi > ylo else [ylo])])


def sweep_figure(rows, N: int, plateaux=()):
    """Entropy estimate against alpha as a polyline; plateaux shaded."""
    xs = [r.alpha for r in rows]
    ys = [r.entropy for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    for a, b in plateaux:
        if b >= xs[0] and a <= xs[-1]:
            ax.axvspan(max(a, xs[0]), min(b, xs[-1]), color="0.9", lw=0)
    ax.plot(xs, ys, "-", color="k", lw=0.8)
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel("entropy (nats)")
    ax.set_title(f"N = {N}")
    _min_max_ticks(ax, xs, ys)
    fig.tight_layout()
    return fig


def domain_figure(domain):
    """Outline of the planar domain with its digit strips."""
    vs = domain.vertices
    xs = [v[0] for v in vs] + [vs[0][0]]
    ys = [v[1] for v in vs] + [vs[0][1]]
    fig, ax = plt.subplots(figsize=(5, 5))
    for _, left, _right in domain.strips[1:]:
        low, top = domain.fiber(left)
        ax.plot([left, left], [float(low), float(top)], color="0.6", lw=0.6)
    ax.plot(xs, ys, color="k", lw=1.0)
    h = domain.heights
    ax.set_yticks(list(h.as_tuple()))
    ax.set_yticklabels(list("ABCDEF"))
    ax.set_xticks([domain.alpha, domain.alpha + 1.0])
    ax.set_xticklabels([r"$\alpha$", r"$\alpha+1$"])
    p = domain.pair
    ax.set_title(f"N={p.N}, d={p.d}, i={p.i}, alpha={domain.alpha:.6g}")
    fig.tight_layout()
    return fig


def save(fig, path) -> None:
    fig.savefig(path, format="svg")
    plt.close(fig)
