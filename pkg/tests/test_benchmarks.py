import time
import warnings
import pytest
from io import StringIO
from pathlib import Path
from unittest.mock import patch

from main import EXIT_OK, run
from src.involutive import is_janet_basis, janet_basis, minimal_janet_basis
from src.parser import load_problem
from src.polynomials import buchberger, conventional_nf

PROBLEMS = Path(__file__).parent.parent / "problems"

pytestmark = pytest.mark.benchmark


def expect_size(label, basis, expected):
    """Completion output sizes depend on the selection schedule; report, don't fail."""
    if len(basis) != expected:
        warnings.warn(f"{label}: {len(basis)} polynomials, expected {expected}")


@pytest.fixture(scope='module')
def speer():
    return load_problem(PROBLEMS / "speer.txt").polynomials()


@pytest.fixture(scope='module')
def speer_groebner(speer):
    return buchberger(speer)


class TestSpeerSystem:
    def test_groebner_basis_size(self, speer_groebner):
        assert len(speer_groebner) == 44

    def test_minimal_janet_basis_size(self, speer):
        report = minimal_janet_basis(speer)
        assert len(report.basis) == 49
        assert is_janet_basis(report.basis)

    def test_janet_basis(self, speer, speer_groebner):
        started = time.perf_counter()
        report = janet_basis(speer)
        elapsed = time.perf_counter() - started

        expect_size("janet_basis", report.basis, 71)
        assert all(not conventional_nf(g, report.basis) for g in speer_groebner)
        assert elapsed < 600

    def test_pure_pommaret_autoreduction(self, speer, speer_groebner):
        report = janet_basis(speer, autoreduction='p')

        expect_size("janet_basis with Pommaret autoreduction", report.basis, 75)
        assert all(not conventional_nf(g, report.basis) for g in speer_groebner)

    @patch('main.setup_logging')
    def test_cli_verify(self, mock_logging):
        out = StringIO()
        with patch.dict('os.environ', {}, clear=True), patch('main.load_dotenv'):
            code = run(['basis', 'minimal-janet', str(PROBLEMS / 'speer.txt'), '--verify'], stdout=out)
        assert code == EXIT_OK
        assert out.getvalue().startswith("# size: 49\n")


class TestCyclic7:
    def test_janet_basis_verifies(self):
        F = load_problem(PROBLEMS / "cyclic7.txt").polynomials()
        report = janet_basis(F)

        assert is_janet_basis(report.basis)
        gb = buchberger(F)
        assert all(not conventional_nf(g, report.basis) for g in gb)
