"""Figure rendering for traces, reachability graphs and harness runs.

Everything here draws to files through the Agg backend; nothing opens a
window.  The CLI imports this module only when a --plot flag is given,
so matplotlib stays optional at run time for plain trace work.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .engine import ReachGraph, Trace
from .syntax import TupleBody

_GRANT = "#2a9d4e"
_DENY = "#c2372f"
_STALL = "#9a9a9a"


def _level_axis(ax, lattice):
    ranks = {name: lattice.rank(lattice.level(name)) for name in lattice.level_names}
    order = sorted(lattice.level_names, key=lambda n: (ranks[n], n))
    ticks = {}
    for name in order:
        # incomparable levels share a rank; spread them a little
        y = ranks[name]
        while y in ticks.values():
            y += 0.34
        ticks[name] = y
    ax.set_yticks(list(ticks.values()))
    ax.set_yticklabels(list(ticks.keys()))
    return ticks


def plot_history(trace: Trace, path: str) -> None:
    """Step chart of every item's history component over a run."""
    lattice = trace.initial.lattice
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ticks = _level_axis(ax, lattice)

    series: dict[str, list[tuple[int, str]]] = {}
    for it in trace.initial.items:
        series[it.key] = [(0, it.state.gH.name)]
    for ev in trace.events:
        for key, _old, new in ev.state_updates:
            series.setdefault(key, []).append((ev.step + 1, new))
        for created in ev.created_items:
            series[created["key"]] = [(ev.step + 1, created["state"]["gH"])]

    last = len(trace.events)
    for key, points in sorted(series.items()):
        xs, ys = [], []
        for x, name in points:
            xs.append(x)
            ys.append(ticks[name])
        xs.append(last + 1)
        ys.append(ys[-1])
        ax.step(xs, ys, where="post", label=key)

    for ev in trace.events:
        if not ev.granted:
            ax.axvline(ev.step + 1, color=_DENY, linestyle=":", linewidth=1)

    ax.set_xlabel("step")
    ax.set_ylabel("history level")
    ax.set_xlim(0, last + 1)
    ax.legend(loc="upper left", fontsize="small", ncol=2)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _depths(graph: ReachGraph) -> dict[int, int]:
    depth = {0: 0}
    frontier = [0]
    while frontier:
        nxt = []
        for src in frontier:
            for s, d, ev in graph.edges:
                if s == src and d not in depth:
                    depth[d] = depth[src] + 1
                    nxt.append(d)
        frontier = nxt
    return depth


def plot_reachability(graph: ReachGraph, path: str) -> None:
    """Layered drawing of the explored state space.  Edge colour is the
    decision: green granted, red denied, grey not enabled."""
    depth = _depths(graph)
    layers: dict[int, list[int]] = {}
    for node, d in sorted(depth.items()):
        layers.setdefault(d, []).append(node)
    pos = {}
    for d, nodes in layers.items():
        for i, node in enumerate(nodes):
            pos[node] = (d, i - (len(nodes) - 1) / 2)

    fig, ax = plt.subplots(figsize=(8, 5))
    for src, dst, ev in graph.edges:
        if src not in pos or dst not in pos:
            continue
        (x0, y0), (x1, y1) = pos[src], pos[dst]
        color = _GRANT if ev.granted else _DENY
        if not ev.enabled:
            color = _STALL
        if src == dst:
            ax.plot([x0], [y0], marker="o", mfc="none", mec=color, ms=16)
            continue
        ax.annotate("", xy=(x1, y1), xytext=(x0, y0),
                    arrowprops={"arrowstyle": "-|>", "color": color, "lw": 1.2})

    terminal = set(graph.terminal)
    for node, (x, y) in pos.items():
        tuples = sum(isinstance(it.body, TupleBody) for it in graph.states[node].items)
        face = "#f2c200" if node in terminal else "#dddddd"
        ax.plot([x], [y], marker="o", ms=13, mfc=face, mec="black", zorder=3)
        ax.annotate("%d" % tuples, (x, y), ha="center", va="center", fontsize=7, zorder=4)

    ax.set_xlabel("distance from the initial state")
    ax.set_yticks([])
    ax.set_title("%d states, %d edges%s" % (len(graph.states), len(graph.edges),
                                            ", truncated" if graph.truncated else ""))
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_harness(reports, path: str) -> None:
    """Grant/deny bars per harness run, with counterexamples stacked on top."""
    reports = list(reports)
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = range(len(reports))
    grants = [r.grants for r in reports]
    denials = [r.denials for r in reports]
    bad = [len(r.counterexamples) for r in reports]
    ax.bar(xs, grants, width=0.6, label="granted", color=_GRANT)
    ax.bar(xs, denials, width=0.6, bottom=grants, label="denied", color=_DENY)
    if any(bad):
        tops = [g + d for g, d in zip(grants, denials)]
        ax.bar(xs, bad, width=0.6, bottom=tops, label="counterexamples", color="black")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(["%s\n%d nets" % (r.lattice_kind, r.instances) for r in reports])
    ax.set_ylabel("decisions")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
