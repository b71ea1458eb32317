"""Structural TeX check: parses a tabular fragment inside a minimal document.

No TeX engine is assumed; when ``pdflatex`` is on PATH it is used as well.
"""

import shutil
import subprocess
import tempfile
from pathlib import Path

from pylatexenc.latexwalker import LatexEnvironmentNode, LatexMacroNode, LatexSpecialsNode, LatexWalker

DOCUMENT = "\\documentclass{article}\n\\begin{document}\n%s\n\\end{document}\n"


def _walk(nodes):
    for n in nodes or []:
        yield n
        yield from _walk(getattr(n, "nodelist", None))


def tabular_cells(fragment: str) -> list[int]:
    """Cells per row of the single tabular in ``fragment``; raises on malformed TeX."""
    walker = LatexWalker(DOCUMENT % fragment, tolerant_parsing=False)
    nodes, _, _ = walker.get_latex_nodes()
    tabs = [n for n in _walk(nodes) if isinstance(n, LatexEnvironmentNode) and n.environmentname == "tabular"]
    assert len(tabs) == 1, "expected exactly one tabular"
    rows, cells = [], 1
    for n in tabs[0].nodelist:
        if isinstance(n, LatexSpecialsNode) and n.specials_chars == "&":
            cells += 1
        elif isinstance(n, LatexMacroNode) and n.macroname == "\\":
            rows.append(cells)
            cells = 1
    return rows


def compile_if_available(fragment: str) -> bool | None:
    exe = shutil.which("pdflatex")
    if exe is None:
        return None
    with tempfile.TemporaryDirectory() as tmp:
        src = Path(tmp) / "t.tex"
        src.write_text(DOCUMENT % fragment)
        proc = subprocess.run([exe, "-interaction=nonstopmode", "-halt-on-error", src.name], cwd=tmp,
                              capture_output=True, timeout=120)
        return proc.returncode == 0


def stray_specials(fragment: str) -> set[str]:
    """Characters that are errors in text mode: ``_ ^ # %`` outside math and escapes."""
    import re

    text = re.sub(r"\\.", "", fragment)
    text = re.sub(r"\$[^$]*\$", "", text)
    return set(text) & set("_^#%~")
