#!/usr/bin/env python3
"""Smoke test for the modcad Python bindings.

Builds (or reuses) the extension module from the workspace, then drives
the engine end to end: parameter sets, codec round trip, the release
lifecycle, engine commands, picking, specification building and SVG
export.

Run from the repository root:  python3 python/smoke_test.py
"""

import math
import os
import shutil
import subprocess
import sys
import sysconfig
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build_extension():
    """Compile the cdylib and stage it importably next to this script."""
    subprocess.run(
        ["cargo", "build", "--release", "-p", "modcad-py"],
        cwd=ROOT,
        check=True,
    )
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    staged = os.path.join(os.path.dirname(os.path.abspath(__file__)), f"modcad{suffix}")
    built = os.path.join(ROOT, "target", "release", "libmodcad.so")
    if not os.path.exists(built):  # e.g. macOS
        built = os.path.join(ROOT, "target", "release", "libmodcad.dylib")
    shutil.copyfile(built, staged)
    return staged


def approx(a, b, eps=1e-9):
    assert abs(a - b) < eps, f"{a} != {b}"


def expect_raises(exc, fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except exc:
        return
    raise AssertionError(f"expected {exc.__name__}")


def main():
    build_extension()
    sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
    import modcad

    # --- coordinate math ------------------------------------------------
    assert modcad.schemas() == ["axono", "table", "user"]
    x, y = modcad.project3(0, 10, 0)
    approx(x, 10 * math.sqrt(2) / 2)
    approx(y, 10 * math.sqrt(2) / 2)
    px, py = modcad.nature_to_paper(1000, 0, (30, 40), 100)
    approx(px, 40.0)
    approx(py, 40.0)
    nx, ny = modcad.paper_to_nature(px, py, (30, 40), 100)
    approx(nx, 1000.0)
    approx(ny, 0.0)

    # --- parameter sets and the codec ------------------------------------
    pp = modcad.Pp("axono")
    p0 = pp.add("points", {"x": 0, "y": 0, "z": 0})
    p1 = pp.add("points", {"x": 0, "y": 0, "z": 2500})
    assert (p0, p1) == (0, 1)
    pipe = pp.add("pipes", {"start": 0, "end": 1, "line_type": "solid"})
    assert pp.record("pipes", pipe)["diameter"] == 50  # bound default
    pp.edit("pipes", pipe, {"diameter": 80})
    lab = pp.add(
        "labels",
        {"target": pipe, "text": "DN80", "height": 2.5, "x": 0, "y": 0, "z": 0},
    )
    assert pp.check_integrity() == []

    blob = pp.encode()
    assert isinstance(blob, bytes) and blob[:4] == b"PPC1"
    back = modcad.Pp.decode(blob)
    assert back.schema_name == "axono"
    assert back.record("pipes", 0)["diameter"] == 80
    assert back.record("labels", lab)["text"] == "DN80"

    # Cascade: deleting the pipe takes its bound label along.
    report = dict(back.delete("pipes", [0]))
    assert report == {"pipes": [0]} or "labels" in report
    assert back.len("labels") == 0
    assert back.check_integrity() == []

    # Corrupt payloads raise instead of crashing.
    expect_raises(ValueError, modcad.Pp.decode, blob[: len(blob) // 2])
    expect_raises(ValueError, modcad.Pp.decode, b"garbage")

    # Release semantics: further use is an error.
    pp.release()
    expect_raises(RuntimeError, pp.len, "points")
    assert repr(pp) == "Pp(released)"

    # --- the engine end to end -------------------------------------------
    with tempfile.TemporaryDirectory() as tmp:
        proj = modcad.Project(420, 297, catalog_dir=os.path.join(tmp, "catalog"))
        assert len(proj.types()) == 15
        names = [c[0] for c in proj.commands("axono")]
        assert names[:9] == [
            "new", "add", "delete", "edit", "read", "write", "take", "place", "release",
        ]

        proj.run("axono", "add-axis", ["0,0,0", "0,0,2500", "2000,0,2500"])
        proj.run("axono", "add-break", ["Z", "1200", "-600"])
        proj.run("axono", "label", ["0", "DN50"])

        # Bad break: a horizontal pipe crosses Z=2500 nowhere, but a
        # diagonal would; exercise a rejected command.
        expect_raises(ValueError, proj.run, "axono", "add-break", ["Z", "1200", "0"])

        hits = proj.pick("axono", (0.0, 30.0), 1.0)
        assert hits and hits[0] == ("pipes", 0)

        session = proj.session("axono")
        assert session.len("pipes") == 2

        proj.run("axono", "write", ["riser-A"])
        proj.run("axono", "place", ["60,120"])
        assert proj.session("axono") is None  # placement ends the session

        proj.add_module(
            "Арматура",
            {"Обозначение": "15кч18п", "Наименование": "Вентиль", "Масса": 3.4},
            anchor=(100, 150),
        )
        proj.add_module(
            "Арматура",
            {"Обозначение": "15кч18п", "Наименование": "Вентиль", "Масса": 3.4},
            anchor=(120, 150),
        )
        proj.run("table", "build", [])
        table = proj.session("table")
        assert table.len("rows") == 1
        proj.run("table", "place", ["240,180"])

        svg = proj.svg()
        assert svg.startswith("<?xml") and "DN50" in svg and "15кч18п" in svg
        dump = proj.dump()
        assert 'module "Аксонометрическая схема"' in dump
        assert 'module "Табличный"' in dump

        path = os.path.join(tmp, "demo.mcd")
        proj.save(path)
        again = modcad.Project.load(path)
        assert again.dump() == dump

        # The catalog written through the engine is readable again.
        fresh = modcad.Project(420, 297, catalog_dir=os.path.join(tmp, "catalog"))
        fresh.run("axono", "read", ["riser-A"])
        assert fresh.session("axono").len("pipes") == 2

        # Determinism of rendering.
        assert again.svg() == svg

    print("smoke test: OK")


if __name__ == "__main__":
    main()
