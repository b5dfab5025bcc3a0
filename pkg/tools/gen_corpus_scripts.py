"""Regenerate the bundled event scripts and session fixtures.

Scripts address holes and nodes by identity, and identities are only
reproducible because `projed run` restarts the counter; whenever hole
instantiation order changes, rerun this tool:

    python3 tools/gen_corpus_scripts.py
"""

from __future__ import annotations

import io
import sys
from pathlib import Path

from projed import bundled_language_path, load_language_file, term_from_source
from projed import session as sess
from projed.cli import parse_script, replay
from projed.persist import encode_identity, save_session
from projed.rewrite import Fuel
from projed.terms import Hole, reset_identity_counter, subterm_at

ROOT = Path(__file__).resolve().parent.parent
LANGS = ROOT / "src" / "projed" / "languages"


class Author:
    """Emits script lines while replaying them, so later lines can name
    identities created by earlier ones."""

    def __init__(self, lang: str, start: str):
        reset_identity_counter()
        self.language = load_language_file(bundled_language_path(lang))
        self.session = sess.new_session(self.language, start)
        self.lines: list[str] = []

    def emit(self, line: str):
        self.lines.append(line)
        entries = parse_script(line)
        replay(self.session, entries, None, err=io.StringIO())

    def holes(self, prefix: str):
        out = []
        for ident, path in sorted(self.session.abstract_cache.items(), key=lambda kv: kv[1]):
            t = subterm_at(self.session.abstract, path)
            if isinstance(t, Hole) and t.clause.startswith(prefix):
                out.append(ident)
        return out

    def hole(self, prefix: str, index=0):
        return encode_identity(self.holes(prefix)[index])

    def shallow_hole(self, prefix: str):
        """The outermost hole of a kind (shortest path, then pre-order)."""
        ids = self.holes(prefix)
        paths = self.session.abstract_cache
        return encode_identity(min(ids, key=lambda i: (len(paths[i]), paths[i])))

    def empty_str_hole(self):
        for ident, path in sorted(self.session.abstract_cache.items(), key=lambda kv: kv[1]):
            t = subterm_at(self.session.abstract, path)
            if isinstance(t, Hole) and t.clause.startswith("str:") and t.display is not None and t.display.value == "":
                return encode_identity(ident)
        raise LookupError("no empty string hole")

    def nodes(self, node_type=None):
        out = []
        for g in self.session.last_scene.graphs:
            for n in g.nodes:
                if node_type is None or n.node_type == node_type:
                    out.append(n)
        return out

    def save(self, name: str, header: str):
        text = f"# {header}\n" + "\n".join(self.lines) + "\n"
        (LANGS / "scripts" / f"{name}.script").write_text(text, encoding="utf-8")
        print(f"wrote {name}.script ({len(self.lines)} lines)")


def dna():
    a = Author("dna", "DNA")
    for i, letter in enumerate("aactgg"):
        a.emit(f"menu {a.hole('star:')} letter")
        if i % 2 == 0:
            a.emit(f"menu {a.hole('or:')} {letter}")
        else:
            a.emit(f"key {a.hole('or:')} {letter}")  # first-letter shortcut
    a.emit("snapshot letters")
    a.save("dna", "grow the gene a a c t g g, menus and key shortcuts mixed")


def boxes():
    a = Author("boxes", "root")
    a.emit(f"menu {a.hole('or:')} tree")
    a.emit(f"edit {a.empty_str_hole()} hair?")
    a.emit(f"menu {a.hole('star:')} tree")
    a.emit(f"menu {a.hole('or:')} leaf")
    a.emit(f"edit {a.empty_str_hole()} mammal")
    a.emit(f"menu {a.hole('star:')} tree")
    a.emit(f"menu {a.hole('or:')} leaf")
    a.emit(f"edit {a.empty_str_hole()} insect")
    a.emit("key -1 t")
    a.emit("snapshot tree-mode")
    a.emit("key -1 b")
    a.emit("snapshot box-mode")
    a.emit("key -1 t")
    a.save("boxes", "small decision tree, then toggle t / b / t")


Y_SOURCE = """(apply (lambda "f" (apply (lambda "x" (apply (ident "f") (apply (ident "x") (ident "x"))))
                                  (lambda "x" (apply (ident "f") (apply (ident "x") (ident "x"))))))
       (lambda "L" (pair (const "1") (ident "L"))))"""


def lambda_calculus():
    reset_identity_counter()
    d = load_language_file(bundled_language_path("lambda_calculus"))
    s = sess.new_session(d, "exp", abstract=term_from_source(Y_SOURCE))
    (LANGS / "sessions" / "lambda_y.pxml").write_text(save_session(s), encoding="utf-8")
    print("wrote lambda_y.pxml")
    lines = ["# six evaluation steps of the Y-combinator stream of ones"]
    for k in range(1, 7):
        lines.append("key -1 e")
        lines.append(f"snapshot step{k}")
    (LANGS / "scripts" / "lambda_calculus.script").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("wrote lambda_calculus.script")


def nested_graph():
    a = Author("nested_graph", "machine")
    a.emit(f"menu {a.shallow_hole('star:')} entity")
    a.emit(f"menu {a.shallow_hole('star:')} entity")
    ents = a.nodes("entity")
    real = [n for n in ents if n.w > 20]  # entity nodes, not hole dots
    first = real[0]
    box_id = "b," + encode_identity(first.node_id).split(",", 1)[1]
    a.emit(f"drag {encode_identity(first.node_id)} 320 180")
    a.emit("snapshot outer")
    a.emit(f"dblclick {box_id}")
    a.emit("snapshot inner")
    a.emit(f"menu {a.hole('star:')} entity")
    a.emit("key -1 up")
    a.emit("snapshot back")
    a.save("nested_graph", "two entities, descend into one, extend it, come back")


def class_models():
    a = Author("class_models", "model")
    a.emit(f"menu {a.shallow_hole('star:')} class")
    a.emit(f"edit {a.empty_str_hole()} Library")
    a.emit(f"menu {a.shallow_hole('star:')} class")
    a.emit(f"edit {a.empty_str_hole()} Book")
    # one field on Library: name : String
    a.emit(f"menu {a.hole('star:')} field")
    a.emit(f"edit {a.empty_str_hole()} name")
    a.emit(f"menu {a.hole('or:')} string")
    classes = a.nodes("class")
    a.emit(f"edge {encode_identity(classes[0].node_id)} {encode_identity(classes[1].node_id)} assoc")
    a.emit("snapshot graphical")
    box_id = "b," + encode_identity(classes[0].node_id).split(",", 1)[1]
    a.emit(f"dblclick {box_id}")
    a.emit("snapshot textual")
    a.save("class_models", "two classes, one typed field, an association, flip one node textual")


def dungeon():
    a = Author("dungeon", "game")
    a.emit(f"menu {a.hole('star:')} room")
    a.emit(f"menu {a.hole('or:')} blue")
    a.emit(f"menu {a.hole('or:')} empty")
    a.emit(f"menu {a.hole('star:')} room")
    a.emit(f"menu {a.hole('or:')} green")
    a.emit(f"menu {a.hole('or:')} cage")
    a.emit(f"menu {a.hole('or:')} red")
    a.emit(f"menu {a.hole('or:')} blue")
    rooms = a.nodes("room")
    a.emit(f"edge {encode_identity(rooms[0].node_id)} {encode_identity(rooms[1].node_id)} north")
    a.emit("snapshot map")
    a.emit("key -1 p")
    a.emit("snapshot start")
    a.emit("key -1 n")
    a.emit("snapshot north")
    a.emit("key -1 u")
    a.emit("snapshot unlocked")
    a.emit("key -1 s")
    a.emit("snapshot south")
    a.save("dungeon", "the storyline: build two rooms and a corridor, then play")


def main():
    (LANGS / "scripts").mkdir(exist_ok=True)
    (LANGS / "sessions").mkdir(exist_ok=True)
    dna()
    boxes()
    lambda_calculus()
    nested_graph()
    class_models()
    dungeon()


if __name__ == "__main__":
    sys.exit(main())
