import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vulnscan.corpus import ingest
from vulnscan.engine import ScanOptions, scan
from vulnscan.rules import builtin_rules


def write_tree(root: Path, files: dict[str, str]) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    for rel, content in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
    return root


@pytest.fixture
def make_corpus(tmp_path):
    def _make(files: dict[str, str], subdir: str = "corpus") -> Path:
        return write_tree(tmp_path / subdir, files)
    return _make


@pytest.fixture
def scan_tree(make_corpus):
    def _scan(files: dict[str, str], pack=None, options=None):
        root = make_corpus(files)
        inventory = ingest(root)
        return scan(inventory, pack or builtin_rules(), options or ScanOptions())
    return _scan


PAPER_SNIPPET_FILES = {
    "src/render.cc": "void draw() {\n  std::memcpy(buffer, str, length);\n}\n",
    "app/Reset.cs": 'public const string R1ResetPassword = "MYPASSWORD";\n',
    "app/Login.cs": "string strUserPassword = txtCurrentPassword.Text.ToUpper();\n",
    "app/Keys.cs": "SecureString class.String key = null;\n",
}
