"""Concrete-syntax handling: validate reduced terms against the normal-form
grammar, lay them out with a fixed monospace metric, hit-test the result and
render it to SVG or a character grid.

All layout constants are pinned so that renders are byte-stable:
base font 12pt, +-2pt per font step with a 6pt floor, line height 1.2x,
glyph advance 0.6x, box padding 4px, graph grid 100px starting at (40,40).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .terms import (
    Atom,
    Compound,
    Hole,
    Identity,
    Term,
    mark_to_hole,
    term_text,
)

BASE_FONT = 12
FONT_STEP = 2
MIN_FONT = 6
PAD = 4
GAP = 4
HOLE_RADIUS = 6
GRID = 100
GRID_ORIGIN = 40
ARROW_LEN = 8
TREE_HGAP = 20
TREE_VGAP = 24
HOLE_COLOR = "#2266cc"

POSITIONS = ("left", "right", "top", "bot", "centre", "align")
DECORATIONS = ("arrow", "none")
LABEL_ENDS = ("source", "target")


def _round_half_up(v: float) -> int:
    return math.floor(v + 0.5)


def measure_text(s: str, size: int) -> tuple[int, int]:
    if size <= 0:
        raise ValueError("font size must be positive")
    return _round_half_up(len(s) * 0.6 * size), _round_half_up(1.2 * size)


# ---------------------------------------------------------------------------
# Validated normal forms

@dataclass(frozen=True)
class Menu:
    entries: tuple  # of (label, message Term)


@dataclass(frozen=True)
class NewLine:
    pass


@dataclass(frozen=True)
class TextNF:
    text: str


@dataclass(frozen=True)
class FontNF:
    delta: int
    body: tuple


@dataclass(frozen=True)
class SeqNF:
    items: tuple


@dataclass(frozen=True)
class TabNF:
    items: tuple


@dataclass(frozen=True)
class IndentNF:
    pixels: int
    items: tuple


@dataclass(frozen=True)
class UnderlineNF:
    body: tuple


@dataclass(frozen=True)
class CharsNF:
    text: str
    identity: Identity
    editable: bool = True


@dataclass(frozen=True)
class HoleNF:
    identity: Identity
    clause: str
    text: str | None = None

    @property
    def is_string(self):
        return self.clause.startswith("str:")


@dataclass(frozen=True)
class BoxNF:
    orient: str  # "box" | "hbox" | "vbox"
    identity: Identity
    border: int | None
    menu: Menu | None
    fixed: bool
    items: tuple  # of (position, NF)


@dataclass(frozen=True)
class EllipseNF:
    x: int
    y: int
    w: int
    h: int
    fill: bool
    selectable: bool
    identity: Identity


@dataclass(frozen=True)
class RectangleNF:
    x: int
    y: int
    w: int
    h: int
    fill: bool
    selectable: bool
    identity: Identity


@dataclass(frozen=True)
class ImageNF:
    w: int
    h: int
    path: str


@dataclass(frozen=True)
class ThumbnailNF:
    x: int
    y: int
    w: int
    h: int
    body: object


@dataclass(frozen=True)
class TreeNF:
    root: object
    children: tuple


@dataclass(frozen=True)
class GNode:
    identity: Identity
    node_type: str
    abstract_term: Term
    display: object


@dataclass(frozen=True)
class GEdge:
    identity: Identity
    edge_type: str | None
    source: Term
    source_dec: str
    target: Term
    target_dec: str
    labels: tuple  # of (end, NF)


@dataclass(frozen=True)
class GraphNF:
    identity: Identity
    edge_types: tuple  # of (label, source_type, target_type)
    nodes: tuple
    edges: tuple


class NFError(Exception):
    def __init__(self, offending: Term, path: tuple, detail: str):
        super().__init__(f"at {list(path)}: {detail}")
        self.offending = offending
        self.path = path
        self.detail = detail


def _err(t, path, detail):
    raise NFError(t, path, detail)


def _functor(t):
    return t.functor if isinstance(t, Compound) else None


def _int_of(t, path, what):
    if isinstance(t, Atom) and t.kind == "integer":
        return t.value
    _err(t, path, f"{what} must be an integer")


def _bool_of(t, path, what):
    if isinstance(t, Atom) and t.kind == "boolean":
        return t.value
    _err(t, path, f"{what} must be #t or #f")


def _parse_menu(t: Term, path) -> Menu:
    entries = []
    for i, e in enumerate(t.children):
        if not isinstance(e, Compound) or len(e.children) != 1:
            _err(e, path + (i,), "a menu entry is (label (message ...))")
        entries.append((e.functor, e.children[0]))
    return Menu(tuple(entries))


def validate_nf(t: Term, path: tuple = ()):  # noqa: C901 - one grammar, one function
    if isinstance(t, Atom):
        return TextNF(t.text())
    if isinstance(t, Hole):
        text = t.display.text() if t.display is not None else None
        return HoleNF(t.identity, t.clause, text)
    h = mark_to_hole(t)
    if h is not None:
        return validate_nf(h, path)
    if not isinstance(t, Compound):
        _err(t, path, "not a term")
    f, cs = t.functor, t.children
    if f == "nl":
        if cs:
            _err(t, path, "(nl) takes no arguments")
        return NewLine()
    if f == "space":
        return TextNF(" ")
    if f == "font":
        if len(cs) < 2 or _functor(cs[0]) not in ("+", "-") or cs[0].children:
            _err(t, path, "font needs (+) or (-) then a body")
        delta = 1 if cs[0].functor == "+" else -1
        return FontNF(delta, tuple(validate_nf(c, path + (i + 1,)) for i, c in enumerate(cs[1:])))
    if f == "seq":
        return SeqNF(tuple(validate_nf(c, path + (i,)) for i, c in enumerate(cs)))
    if f == "tab":
        if not cs:
            _err(t, path, "tab needs a body")
        return TabNF(tuple(validate_nf(c, path + (i,)) for i, c in enumerate(cs)))
    if f == "indent":
        if len(cs) < 2:
            _err(t, path, "indent needs a width and a body")
        return IndentNF(_int_of(cs[0], path + (0,), "indent width"),
                        tuple(validate_nf(c, path + (i + 1,)) for i, c in enumerate(cs[1:])))
    if f == "underline":
        if not cs:
            _err(t, path, "underline needs a body")
        return UnderlineNF(tuple(validate_nf(c, path + (i,)) for i, c in enumerate(cs)))
    if f == "chars":
        if len(cs) != 1 or not (isinstance(cs[0], Atom) and cs[0].kind == "string"):
            _err(t, path, "chars needs one string")
        return CharsNF(cs[0].value, t.identity)
    if f in ("box", "hbox", "vbox"):
        return _validate_box(t, path)
    if f == "ellipse" or f == "rectangle":
        if len(cs) < 4 or len(cs) > 6:
            _err(t, path, f"{f} needs x y w h and optional fill/selectable flags")
        nums = [_int_of(c, path + (i,), "a shape coordinate") for i, c in enumerate(cs[:4])]
        fill = _bool_of(cs[4], path + (4,), "fill") if len(cs) > 4 else False
        sel = _bool_of(cs[5], path + (5,), "selectable") if len(cs) > 5 else False
        cls = EllipseNF if f == "ellipse" else RectangleNF
        return cls(*nums, fill, sel, t.identity)
    if f == "image":
        if len(cs) != 3 or not (isinstance(cs[2], Atom) and cs[2].kind == "string"):
            _err(t, path, "image needs width height path")
        return ImageNF(_int_of(cs[0], path + (0,), "width"), _int_of(cs[1], path + (1,), "height"), cs[2].value)
    if f == "thumbnail":
        if len(cs) != 5:
            _err(t, path, "thumbnail needs x y w h body")
        nums = [_int_of(c, path + (i,), "a thumbnail coordinate") for i, c in enumerate(cs[:4])]
        return ThumbnailNF(*nums, validate_nf(cs[4], path + (4,)))
    if f == "tree":
        if not cs:
            _err(t, path, "tree needs a root")
        return TreeNF(validate_nf(cs[0], path + (0,)),
                      tuple(validate_nf(c, path + (i + 1,)) for i, c in enumerate(cs[1:])))
    if f == "graph":
        return _validate_graph(t, path)
    _err(t, path, f"{f!r} is not a normal-form constructor")


def _validate_box(t: Compound, path) -> BoxNF:
    border = None
    menu = None
    fixed = False
    items = []
    for i, c in enumerate(t.children):
        cf = _functor(c)
        if cf in ("border", "outline"):
            border = _int_of(c.children[0], path + (i, 0), "border width") if c.children else 1
        elif cf == "fixed":
            fixed = True
        elif cf == "menu":
            menu = _parse_menu(c, path + (i,))
        elif cf in POSITIONS:
            if len(c.children) != 1:
                _err(c, path + (i,), f"({cf} ...) positions exactly one element")
            items.append((cf, validate_nf(c.children[0], path + (i, 0))))
        else:
            _err(c, path + (i,), f"box children are attributes or positioned elements, got {term_text(c)}")
    return BoxNF(t.functor, t.identity, border, menu, fixed, tuple(items))


def _validate_graph(t: Compound, path) -> GraphNF:
    cs = t.children
    if not cs or _functor(cs[0]) != "edge-types":
        _err(t, path, "a graph starts with (edge-types ...)")
    edge_types = []
    for i, et in enumerate(cs[0].children):
        if (not isinstance(et, Compound) or len(et.children) != 2
                or not all(isinstance(x, Compound) and not x.children for x in et.children)):
            _err(et, path + (0, i), "an edge type is (label (source-type) (target-type))")
        edge_types.append((et.functor, et.children[0].functor, et.children[1].functor))
    type_names = {l for l, _, _ in edge_types}
    nodes, edges = [], []
    for i, c in enumerate(cs[1:], start=1):
        cf = _functor(c)
        if cf == "node":
            if len(c.children) != 3:
                _err(c, path + (i,), "a node is ((node id ...) (type) abstract-id display)")
            ty = c.children[0]
            if not isinstance(ty, Compound) or ty.children:
                _err(c, path + (i, 0), "node type must be a 0-ary constructor")
            nodes.append(GNode(c.identity, ty.functor, c.children[1], validate_nf(c.children[2], path + (i, 2))))
        elif cf == "edge":
            edges.append(_validate_edge(c, path + (i,), type_names))
        else:
            _err(c, path + (i,), "graph children must be nodes or edges")
    return GraphNF(t.identity, tuple(edge_types), tuple(nodes), tuple(edges))


def _validate_edge(t: Compound, path, type_names) -> GEdge:
    cs = list(t.children)
    edge_type = None
    if cs and isinstance(cs[0], Compound) and not cs[0].children and cs[0].functor in type_names:
        edge_type = cs[0].functor
        cs = cs[1:]
    if len(cs) < 4:
        _err(t, path, "an edge is (edge [type] source dec target dec label ...)")
    src, sdec, tgt, tdec = cs[0], cs[1], cs[2], cs[3]
    for d, where in ((sdec, 1), (tdec, 3)):
        if _functor(d) not in DECORATIONS or d.children:
            _err(d, path + (where,), "a decoration is (arrow) or (none)")
    labels = []
    for j, lab in enumerate(cs[4:], start=4):
        if _functor(lab) != "label" or len(lab.children) != 2:
            _err(lab, path + (j,), "an edge label is (label (source|target) nf)")
        end = lab.children[0]
        if _functor(end) not in LABEL_ENDS or end.children:
            _err(end, path + (j, 0), "label end must be (source) or (target)")
        labels.append((end.functor, validate_nf(lab.children[1], path + (j, 1))))
    return GEdge(t.identity, edge_type, src, sdec.functor, tgt, tdec.functor, tuple(labels))


def check_nf(t: Term):
    """None when t is a valid normal form, else (term, path, detail)."""
    try:
        validate_nf(t)
        return None
    except NFError as e:
        return e.offending, e.path, e.detail


# ---------------------------------------------------------------------------
# Layout

@dataclass
class LayoutCache:
    positions: dict = field(default_factory=dict)  # Identity -> (x, y)
    waypoints: dict = field(default_factory=dict)  # Identity -> [(x, y), ...]


@dataclass
class Primitive:
    kind: str  # text | rect | ellipse | line | polygon | image
    x: float
    y: float
    w: float
    h: float
    text: str | None = None
    size: float | None = None
    points: tuple = ()
    color: str | None = None
    filled: bool = False
    stroke: float | None = None
    concrete: Identity | None = None
    abstract: Identity | None = None
    menu: Menu | None = None
    selectable: bool = False
    editable: bool = False
    hole_clause: str | None = None
    node_id: Identity | None = None
    path: str | None = None


@dataclass(frozen=True)
class NodeLayout:
    node_id: Identity
    node_type: str
    abstract_term: Term
    x: float
    y: float
    w: float
    h: float


@dataclass(frozen=True)
class GraphLayout:
    edge_types: tuple
    nodes: tuple


@dataclass
class Scene:
    primitives: list
    width: float
    height: float
    graphs: list = field(default_factory=list)


def _shift(prims, dx, dy):
    for p in prims:
        p.x += dx
        p.y += dy
        if p.points:
            p.points = tuple((px + dx, py + dy) for px, py in p.points)
    return prims


def _bbox(prims):
    if not prims:
        return 0.0, 0.0
    return max(p.x + p.w for p in prims), max(p.y + p.h for p in prims)


class _Layout:
    def __init__(self, cache: LayoutCache, viewport):
        self.cache = cache
        self.viewport = viewport
        self.graphs: list[GraphLayout] = []
        self.in_thumbnail = 0

    # -- blocks -------------------------------------------------------------

    def block(self, nf, size: int) -> list[Primitive]:
        """Lay out nf at origin, returning its primitives."""
        if isinstance(nf, BoxNF):
            return self.box(nf, size)
        if isinstance(nf, EllipseNF) or isinstance(nf, RectangleNF):
            kind = "ellipse" if isinstance(nf, EllipseNF) else "rect"
            return [Primitive(kind, nf.x, nf.y, nf.w, nf.h, filled=nf.fill, stroke=1,
                              selectable=nf.selectable and not self.in_thumbnail,
                              concrete=nf.identity if nf.selectable else None)]
        if isinstance(nf, ImageNF):
            return [Primitive("image", 0, 0, nf.w, nf.h, path=nf.path, stroke=1)]
        if isinstance(nf, ThumbnailNF):
            return self.thumbnail(nf, size)
        if isinstance(nf, TreeNF):
            return self.tree(nf, size)
        if isinstance(nf, GraphNF):
            return self.graph(nf, size)
        flow = _Flow(self, size)
        flow.put(nf)
        return flow.prims

    def box(self, nf: BoxNF, size: int) -> list[Primitive]:
        blocks = [(pos, self.block(item, size)) for pos, item in nf.items]
        sizes = [_bbox(prims) for _, prims in blocks]
        if nf.orient == "hbox":
            inner_h = max([h for _, h in sizes], default=0)
            x = PAD
            placed = []
            for (pos, prims), (w, h) in zip(blocks, sizes):
                y = {"top": PAD, "bot": PAD + inner_h - h, "centre": PAD + (inner_h - h) / 2}.get(pos, PAD)
                placed.append(_shift(prims, x, y))
                x += w + GAP
            total_w = x - GAP + PAD if blocks else 2 * PAD
            total_h = inner_h + 2 * PAD
        elif nf.orient == "vbox":
            inner_w = max([w for w, _ in sizes], default=0)
            y = PAD
            placed = []
            for (pos, prims), (w, h) in zip(blocks, sizes):
                x = {"left": PAD, "right": PAD + inner_w - w, "centre": PAD + (inner_w - w) / 2}.get(pos, PAD)
                placed.append(_shift(prims, x, y))
                y += h + GAP
            total_w = inner_w + 2 * PAD
            total_h = y - GAP + PAD if blocks else 2 * PAD
        else:
            inner_w = max([w for w, _ in sizes], default=0)
            inner_h = max([h for _, h in sizes], default=0)
            placed = []
            for (pos, prims), (w, h) in zip(blocks, sizes):
                x, y = {
                    "left": (PAD, PAD + (inner_h - h) / 2),
                    "right": (PAD + inner_w - w, PAD + (inner_h - h) / 2),
                    "top": (PAD + (inner_w - w) / 2, PAD),
                    "bot": (PAD + (inner_w - w) / 2, PAD + inner_h - h),
                    "centre": (PAD + (inner_w - w) / 2, PAD + (inner_h - h) / 2),
                }.get(pos, (PAD, PAD))
                placed.append(_shift(prims, x, y))
            total_w = inner_w + 2 * PAD
            total_h = inner_h + 2 * PAD
        frame = Primitive("rect", 0, 0, total_w, total_h, stroke=nf.border,
                          selectable=not self.in_thumbnail, concrete=nf.identity, menu=nf.menu)
        out = [frame]
        for prims in placed:
            out.extend(prims)
        return out

    def tree(self, nf: TreeNF, size: int) -> list[Primitive]:
        root = self.block(nf.root, size)
        rw, rh = _bbox(root)
        kids = [self.block(c, size) for c in nf.children]
        kid_sizes = [_bbox(k) for k in kids]
        row_w = sum(w for w, _ in kid_sizes) + TREE_HGAP * max(0, len(kids) - 1)
        total_w = max(rw, row_w)
        out = _shift(root, (total_w - rw) / 2, 0)
        x = (total_w - row_w) / 2
        ky = rh + TREE_VGAP
        root_anchor = ((total_w) / 2, rh)
        for prims, (w, h) in zip(kids, kid_sizes):
            out.append(Primitive("line", min(root_anchor[0], x + w / 2), rh,
                                 abs(x + w / 2 - root_anchor[0]), TREE_VGAP,
                                 points=(root_anchor, (x + w / 2, ky))))
            out.extend(_shift(prims, x, ky))
            x += w + TREE_HGAP
        return out

    def thumbnail(self, nf: ThumbnailNF, size: int) -> list[Primitive]:
        self.in_thumbnail += 1
        body = self.block(nf.body, size)
        self.in_thumbnail -= 1
        bw, bh = _bbox(body)
        s = min(nf.w / bw if bw else 1.0, nf.h / bh if bh else 1.0)
        for p in body:
            p.x, p.y, p.w, p.h = p.x * s + nf.x, p.y * s + nf.y, p.w * s, p.h * s
            if p.size is not None:
                p.size *= s
            if p.stroke is not None:
                p.stroke = max(p.stroke * s, 0.25)
            if p.points:
                p.points = tuple((px * s + nf.x, py * s + nf.y) for px, py in p.points)
            p.selectable = False
        return body

    def graph(self, nf: GraphNF, size: int) -> list[Primitive]:
        live = not self.in_thumbnail
        blocks = {}
        placed: dict[Identity, tuple] = {}
        occupied = set()

        def cell_of(x, y):
            return (round((x - GRID_ORIGIN) / GRID), round((y - GRID_ORIGIN) / GRID))

        for node in nf.nodes:
            blocks[node.identity] = self.block(node.display, size)
            if live and node.identity in self.cache.positions:
                placed[node.identity] = self.cache.positions[node.identity]
                occupied.add(cell_of(*placed[node.identity]))
        cols = max(1, int((self.viewport[0] - GRID_ORIGIN) // GRID))
        nxt = 0
        for node in nf.nodes:
            if node.identity in placed:
                continue
            while (nxt % cols, nxt // cols) in occupied:
                nxt += 1
            cx, cy = nxt % cols, nxt // cols
            occupied.add((cx, cy))
            placed[node.identity] = (GRID_ORIGIN + cx * GRID, GRID_ORIGIN + cy * GRID)
            if live:
                self.cache.positions[node.identity] = placed[node.identity]

        out: list[Primitive] = []
        layouts = []
        boxes = {}
        for node in nf.nodes:
            x, y = placed[node.identity]
            prims = _shift(blocks[node.identity], x, y)
            w, h = 0.0, 0.0
            for p in prims:
                p.node_id = node.identity
                if p.abstract is None:
                    p.abstract = _identity_of(node.abstract_term)
                w = max(w, p.x + p.w - x)
                h = max(h, p.y + p.h - y)
            boxes[node.identity] = (x, y, w, h)
            layouts.append(NodeLayout(node.identity, node.node_type, node.abstract_term, x, y, w, h))
            out.extend(prims)
        edge_prims: list[Primitive] = []
        for edge in nf.edges:
            edge_prims.extend(self.edge(edge, nf, boxes, size))
        if live:
            self.graphs.append(GraphLayout(nf.edge_types, tuple(layouts)))
        return edge_prims + out

    def edge(self, edge: GEdge, nf: GraphNF, boxes, size) -> list[Primitive]:
        src = self._node_box(edge.source, nf, boxes)
        tgt = self._node_box(edge.target, nf, boxes)
        if src is None or tgt is None:
            return []
        if src == tgt:
            x, y, w, h = src
            pts = ((x + w, y + h / 3), (x + w + 20, y + h / 3), (x + w + 20, y + 2 * h / 3), (x + w, y + 2 * h / 3))
            return [Primitive("line", x + w, y + h / 3, 20, h / 3, points=pts, stroke=1)]
        a = self._anchor(src, tgt)
        b = self._anchor(tgt, src)
        out = [Primitive("line", min(a[0], b[0]), min(a[1], b[1]),
                         abs(b[0] - a[0]), abs(b[1] - a[1]), points=(a, b), stroke=1)]
        if edge.source_dec == "arrow":
            out.append(self._arrow(b, a))
        if edge.target_dec == "arrow":
            out.append(self._arrow(a, b))
        for end, label_nf in edge.labels:
            t = 0.25 if end == "source" else 0.75
            lx, ly = a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t
            out.extend(_shift(self.block(label_nf, size), lx + 4, ly + 4))
        return out

    def _node_box(self, id_term, nf: GraphNF, boxes):
        from .matching import identity_from_term

        for node in nf.nodes:
            if node.abstract_term == id_term:
                return boxes[node.identity]
        want = identity_from_term(id_term)
        for node in nf.nodes:
            if want is not None and identity_from_term(node.abstract_term) == want:
                return boxes[node.identity]
            if node.identity == want:
                return boxes[node.identity]
        return None

    @staticmethod
    def _anchor(box, other):
        x, y, w, h = box
        ox, oy, ow, oh = other
        cx, cy = x + w / 2, y + h / 2
        tx, ty = ox + ow / 2, oy + oh / 2
        dx, dy = tx - cx, ty - cy
        if dx == 0 and dy == 0:
            return cx, cy
        scale = min(
            (w / 2) / abs(dx) if dx else math.inf,
            (h / 2) / abs(dy) if dy else math.inf,
        )
        return cx + dx * scale, cy + dy * scale

    @staticmethod
    def _arrow(frm, at):
        dx, dy = at[0] - frm[0], at[1] - frm[1]
        length = math.hypot(dx, dy) or 1.0
        ux, uy = dx / length, dy / length
        base = (at[0] - ux * ARROW_LEN, at[1] - uy * ARROW_LEN)
        left = (base[0] - uy * ARROW_LEN / 2, base[1] + ux * ARROW_LEN / 2)
        right = (base[0] + uy * ARROW_LEN / 2, base[1] - ux * ARROW_LEN / 2)
        pts = (at, left, right)
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        return Primitive("polygon", min(xs), min(ys), max(xs) - min(xs), max(ys) - min(ys),
                         points=pts, filled=True)


def _identity_of(t: Term) -> Identity | None:
    from .matching import identity_from_term

    return identity_from_term(t)


class _Flow:
    """Cursor-driven text flow; non-textual items are placed as inline
    blocks."""

    def __init__(self, layout: _Layout, size: int):
        self.layout = layout
        self.prims: list[Primitive] = []
        self.x = 0.0
        self.y = 0.0
        self.margin = 0.0
        self.size = size
        self.line_h = float(measure_text("", size)[1])

    def newline(self):
        self.x = self.margin
        self.y += self.line_h
        self.line_h = float(measure_text("", self.size)[1])

    def put(self, nf):
        if isinstance(nf, NewLine):
            self.newline()
        elif isinstance(nf, TextNF):
            self.text(nf.text)
        elif isinstance(nf, SeqNF):
            for item in nf.items:
                self.put(item)
        elif isinstance(nf, FontNF):
            prev = self.size
            self.size = max(MIN_FONT, self.size + nf.delta * FONT_STEP)
            for item in nf.body:
                self.put(item)
            self.size = prev
        elif isinstance(nf, TabNF):
            prev = self.margin
            self.margin = self.x
            for item in nf.items:
                self.put(item)
            self.margin = prev
        elif isinstance(nf, IndentNF):
            prev = self.margin
            self.margin = prev + nf.pixels
            for item in nf.items:
                self.put(item)
            self.margin = prev
        elif isinstance(nf, UnderlineNF):
            x0, y0 = self.x, self.y
            for item in nf.body:
                self.put(item)
            _, th = measure_text("", self.size)
            self.prims.append(Primitive("line", x0, y0 + th - 1, self.x - x0, 0,
                                        points=((x0, y0 + th - 1), (self.x, y0 + th - 1)), stroke=1))
        elif isinstance(nf, CharsNF):
            self.chars(nf.text, nf.identity, editable=nf.editable, clause=None)
        elif isinstance(nf, HoleNF):
            if nf.is_string:
                self.chars(nf.text or "", nf.identity, editable=True, clause=nf.clause)
            else:
                d = HOLE_RADIUS * 2
                self.prims.append(Primitive(
                    "ellipse", self.x, self.y, d, d, color=HOLE_COLOR, filled=True,
                    selectable=not self.layout.in_thumbnail,
                    concrete=nf.identity, abstract=nf.identity, hole_clause=nf.clause))
                self.x += d
                self.line_h = max(self.line_h, float(d))
        else:
            prims = self.layout.block(nf, self.size)
            w, h = _bbox(prims)
            self.prims.extend(_shift(prims, self.x, self.y))
            self.x += w
            self.line_h = max(self.line_h, h)

    def text(self, s: str):
        w, h = measure_text(s, self.size)
        self.prims.append(Primitive("text", self.x, self.y, w, h, text=s, size=self.size))
        self.x += w
        self.line_h = max(self.line_h, float(h))

    def chars(self, s: str, identity, editable, clause):
        w, h = measure_text(s, self.size)
        w = max(w, 14)  # keep empty editors clickable
        self.prims.append(Primitive(
            "text", self.x, self.y, w, h, text=s, size=self.size,
            selectable=not self.layout.in_thumbnail, editable=editable,
            concrete=identity, abstract=identity, hole_clause=clause))
        self.x += w
        self.line_h = max(self.line_h, float(h))


def layout(nf, cache: LayoutCache, viewport=(800, 600)) -> Scene:
    engine = _Layout(cache, viewport)
    prims = engine.block(nf, BASE_FONT)
    w, h = _bbox(prims)
    return Scene(prims, max(w, 1.0), max(h, 1.0), engine.graphs)


def hit_test(scene: Scene, x: float, y: float):
    for p in reversed(scene.primitives):
        if p.selectable and p.x <= x <= p.x + p.w and p.y <= y <= p.y + p.h:
            return p.concrete, p.abstract
    return None


def edge_types_between(scene: Scene, source: Identity, target: Identity):
    """Declared edge types connecting the two graph nodes, in declaration
    order.  Accepts node identities or the abstract identities on nodes."""
    from .matching import identity_from_term

    def find(ident):
        for g in scene.graphs:
            for n in g.nodes:
                if n.node_id == ident or identity_from_term(n.abstract_term) == ident:
                    return g, n
        return None

    src = find(source)
    tgt = find(target)
    if src is None or tgt is None:
        raise KeyError("identity does not name a graph node")
    g, sn = src
    _, tn = tgt
    return [(label, st, tt) for label, st, tt in g.edge_types
            if st == sn.node_type and tt == tn.node_type]


# ---------------------------------------------------------------------------
# Rendering

def _fmt(v) -> str:
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def render_svg(scene: Scene) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_fmt(scene.width)}" height="{_fmt(scene.height)}">',
    ]
    for p in scene.primitives:
        color = p.color or "black"
        if p.kind == "text" and p.text:
            baseline = p.y + (p.size or BASE_FONT)
            lines.append(
                f'  <text x="{_fmt(p.x)}" y="{_fmt(baseline)}" font-family="monospace" '
                f'font-size="{_fmt(p.size or BASE_FONT)}" fill="{color}">{_esc(p.text)}</text>'
            )
        elif p.kind == "rect" and (p.stroke or p.filled):
            fill = color if p.filled else "none"
            stroke = f' stroke="{color}" stroke-width="{_fmt(p.stroke)}"' if p.stroke else ""
            lines.append(
                f'  <rect x="{_fmt(p.x)}" y="{_fmt(p.y)}" width="{_fmt(p.w)}" height="{_fmt(p.h)}" fill="{fill}"{stroke}/>'
            )
        elif p.kind == "ellipse":
            fill = color if p.filled else "none"
            stroke = f' stroke="{color}" stroke-width="{_fmt(p.stroke)}"' if p.stroke else ""
            lines.append(
                f'  <ellipse cx="{_fmt(p.x + p.w / 2)}" cy="{_fmt(p.y + p.h / 2)}" rx="{_fmt(p.w / 2)}" '
                f'ry="{_fmt(p.h / 2)}" fill="{fill}"{stroke}/>'
            )
        elif p.kind == "line" and p.points:
            pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in p.points)
            lines.append(f'  <polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{_fmt(p.stroke or 1)}"/>')
        elif p.kind == "polygon" and p.points:
            pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in p.points)
            lines.append(f'  <polygon points="{pts}" fill="{color}"/>')
        elif p.kind == "image":
            lines.append(
                f'  <rect x="{_fmt(p.x)}" y="{_fmt(p.y)}" width="{_fmt(p.w)}" height="{_fmt(p.h)}" '
                f'fill="none" stroke="black" stroke-width="1"/>'
            )
            if p.path:
                lines.append(
                    f'  <image x="{_fmt(p.x)}" y="{_fmt(p.y)}" width="{_fmt(p.w)}" height="{_fmt(p.h)}" href="{_esc(p.path)}"/>'
                )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


CELL_W, CELL_H = measure_text("x", BASE_FONT)


def render_text(scene: Scene) -> str:
    grid: dict[tuple[int, int], str] = {}

    def put(row, col, s):
        for k, ch in enumerate(s):
            grid[(row, col + k)] = ch

    for p in scene.primitives:
        row = int(p.y // CELL_H)
        col = int(p.x // CELL_W)
        if p.kind == "text" and p.text:
            put(row, col, p.text)
        elif p.hole_clause is not None and p.kind == "ellipse":
            put(row, col, "[●]")
        elif p.kind == "image":
            put(row, col, "[img]")
    if not grid:
        return ""
    rows = max(r for r, _ in grid) + 1
    out = []
    for r in range(rows):
        cols = [c for (rr, c) in grid if rr == r]
        line = "".join(grid.get((r, c), " ") for c in range(max(cols) + 1)) if cols else ""
        out.append(line.rstrip())
    return "\n".join(out) + "\n"
