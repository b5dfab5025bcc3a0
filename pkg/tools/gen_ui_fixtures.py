"""Regenerate the scene fixtures the frontend tests run against, using the
real engine so the client is exercised with authentic wire payloads."""

import json
from pathlib import Path

from projed import bundled_language_path, load_language_file
from projed.bridge import encode_scene
from projed.session import KeyPressed, dispatch, expand_hole, new_session
from projed.terms import Hole, reset_identity_counter, subterm_at

OUT = Path(__file__).resolve().parent.parent / "frontend" / "test" / "fixtures"


def holes(s, prefix):
    out = []
    for ident, path in sorted(s.abstract_cache.items(), key=lambda kv: kv[1]):
        t = subterm_at(s.abstract, path)
        if isinstance(t, Hole) and t.clause.startswith(prefix):
            out.append(ident)
    return out


def write(name, payload: bytes):
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / name).write_text(json.dumps(json.loads(payload), indent=1) + "\n", encoding="utf-8")
    print(f"wrote {name}")


def main():
    reset_identity_counter()
    d = load_language_file(bundled_language_path("boxes"))
    s = new_session(d, "root")
    expand_hole(s, holes(s, "or:")[0], "tree")
    from projed.session import edit_string

    edit_string(s, holes(s, "str:")[0], "hair?")
    write("boxes_boxes_mode.json", encode_scene(s.last_scene, s.revision))
    dispatch(s, KeyPressed(None, "t"))
    write("boxes_tree_mode.json", encode_scene(s.last_scene, s.revision))

    reset_identity_counter()
    d = load_language_file(bundled_language_path("dungeon"))
    s = new_session(d, "game")
    star = holes(s, "star:")[0]
    expand_hole(s, star, "room")
    expand_hole(s, star, "room")
    write("dungeon_two_rooms.json", encode_scene(s.last_scene, s.revision))


if __name__ == "__main__":
    main()
