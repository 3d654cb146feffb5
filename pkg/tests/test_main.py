import copy
import logging
import pytest
from io import StringIO
from logging.handlers import RotatingFileHandler
from pathlib import Path
from unittest.mock import mock_open, patch

import main
from main import (
    DEFAULT_CONFIG, EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_VERIFICATION, _apply_env_overrides, build_parser,
    load_config, render_basis, run, setup_logging, validate_config,
)

PROBLEMS = Path(__file__).parent.parent / "problems"
SMALL_PROBLEMS = [
    "monomial_x1x2.txt", "pj_reduction.txt", "nonminimal_janet.txt", "diff_heat.txt", "diff_two_unknowns.txt",
]


def problem(name):
    return str(PROBLEMS / name)


class TestLoadConfig:
    @patch('main.load_dotenv')
    @patch('builtins.open', new_callable=mock_open, read_data='basis:\n  criterion: false')
    @patch('yaml.safe_load')
    def test_load_config_success(self, mock_yaml_load, mock_file, mock_dotenv):
        mock_yaml_load.return_value = {'basis': {'criterion': False}}

        with patch.dict('os.environ', {}, clear=True):
            result = load_config('config/test.yaml')

        mock_file.assert_called_once_with('config/test.yaml', 'r')
        mock_yaml_load.assert_called_once()
        assert result['basis']['criterion'] is False
        # untouched keys keep their defaults
        assert result['basis']['autoreduction'] == 'pj'
        assert result['checks']['degree_margin'] == 2

    @patch('main.load_dotenv')
    def test_load_config_default_filename(self, mock_dotenv):
        with patch('builtins.open', mock_open(read_data='{}')) as mock_file:
            with patch('yaml.safe_load', return_value={}):
                load_config()
                mock_file.assert_called_once_with('config/config.yaml', 'r')

    @patch('main.load_dotenv')
    def test_missing_default_file_uses_defaults(self, mock_dotenv):
        with patch('builtins.open', side_effect=FileNotFoundError):
            with patch.dict('os.environ', {}, clear=True):
                assert load_config() == DEFAULT_CONFIG

    @patch('main.load_dotenv')
    def test_missing_explicit_file_raises(self, mock_dotenv):
        with patch('builtins.open', side_effect=FileNotFoundError):
            with pytest.raises(FileNotFoundError):
                load_config('config/absent.yaml')

    @patch('main.load_dotenv')
    def test_non_mapping_rejected(self, mock_dotenv):
        with patch('builtins.open', mock_open(read_data='- a\n- b')):
            with pytest.raises(ValueError, match="must be a dictionary"):
                load_config('config/list.yaml')

    @patch('main.load_dotenv')
    @patch('main._apply_env_overrides')
    @patch('builtins.open', new_callable=mock_open, read_data='checks:\n  degree_margin: 3')
    @patch('yaml.safe_load')
    def test_load_config_applies_env_overrides(self, mock_yaml_load, mock_file, mock_apply_env, mock_dotenv):
        mock_yaml_load.return_value = {'checks': {'degree_margin': 3}}

        config = load_config('test.yaml')

        mock_apply_env.assert_called_once_with(config)
        assert config['checks']['degree_margin'] == 3


class TestEnvironmentOverrides:
    def test_boolean_values(self):
        config = {'basis': {'criterion': True, 'verify': False}}

        with patch.dict('os.environ', {
            'INVOLUTIVE_BASIS_CRITERION': 'false',
            'INVOLUTIVE_BASIS_VERIFY': 'yes',
        }):
            _apply_env_overrides(config)

        assert config['basis']['criterion'] is False
        assert config['basis']['verify'] is True

    def test_integer_values(self):
        config = {}

        with patch.dict('os.environ', {'INVOLUTIVE_CHECKS_DEGREE_MARGIN': '5'}):
            _apply_env_overrides(config)

        assert config['checks']['degree_margin'] == 5

    def test_invalid_integer(self):
        config = {}

        with patch.dict('os.environ', {'INVOLUTIVE_CHECKS_DEGREE_MARGIN': 'many'}):
            with patch('main.logging') as mock_logging:
                _apply_env_overrides(config)
                mock_logging.warning.assert_called_once()
        assert 'degree_margin' not in config.get('checks', {})

    def test_string_values_and_underscore_fields(self):
        config = {}

        with patch.dict('os.environ', {
            'INVOLUTIVE_BASIS_AUTOREDUCTION': 'p',
            'INVOLUTIVE_BENCHMARKS_DATABASE': '/tmp/runs.db',
        }):
            _apply_env_overrides(config)

        assert config['basis']['autoreduction'] == 'p'
        assert config['benchmarks']['database'] == '/tmp/runs.db'

    def test_ignores_non_matching_vars(self):
        config = {}

        with patch.dict('os.environ', {
            'OTHER_VAR': 'value',
            'INVOLUTIVE_': 'incomplete',
            'INVOLUTIVE_VERBOSE': 'single_part',
        }, clear=True):
            _apply_env_overrides(config)

        assert config == {}


class TestValidateConfig:
    def setup_method(self):
        self.config = copy.deepcopy(DEFAULT_CONFIG)

    def test_defaults_are_valid(self):
        validate_config(self.config)

    def test_unknown_autoreduction(self):
        self.config['basis']['autoreduction'] = 'janet'
        with pytest.raises(ValueError, match="basis.autoreduction"):
            validate_config(self.config)

    def test_criterion_must_be_boolean(self):
        self.config['basis']['criterion'] = 'sometimes'
        with pytest.raises(ValueError, match="basis.criterion must be a boolean"):
            validate_config(self.config)

    @pytest.mark.parametrize('margin', [-1, 'two', True])
    def test_degree_margin(self, margin):
        self.config['checks']['degree_margin'] = margin
        with pytest.raises(ValueError, match="degree_margin"):
            validate_config(self.config)

    def test_logging_level(self):
        self.config['logging']['level'] = 'CHATTY'
        with pytest.raises(ValueError, match="Unknown logging level"):
            validate_config(self.config)

    def test_section_must_be_mapping(self):
        self.config['basis'] = ['pj']
        with pytest.raises(ValueError, match="must be a mapping"):
            validate_config(self.config)

    def test_database_required(self):
        self.config['benchmarks']['database'] = ''
        with pytest.raises(ValueError, match="benchmarks.database"):
            validate_config(self.config)


class TestSetupLogging:
    def test_rotating_file_handler(self, tmp_path):
        log_file = tmp_path / 'logs' / 'run.log'
        setup_logging({'logging': {'level': 'DEBUG', 'file': str(log_file)}})
        try:
            handlers = logging.getLogger().handlers
            rotating = [h for h in handlers if isinstance(h, RotatingFileHandler)]
            assert len(rotating) == 1
            assert rotating[0].maxBytes == 5 * 1024 * 1024
            assert rotating[0].backupCount == 5
            assert log_file.parent.exists()
        finally:
            for h in logging.getLogger().handlers:
                h.close()
            logging.getLogger().handlers.clear()

    def test_verbose_adds_stream_handler(self, tmp_path):
        setup_logging({'logging': {'file': str(tmp_path / 'run.log')}}, verbose=True)
        try:
            handlers = logging.getLogger().handlers
            assert any(type(h) is logging.StreamHandler for h in handlers)
        finally:
            for h in logging.getLogger().handlers:
                h.close()
            logging.getLogger().handlers.clear()


class TestRendering:
    def test_basis_template(self):
        text = render_basis(['x*y - z', 'z^2'], {'prolongations': 3, 'minimal': False})
        assert text == "# size: 2\nx*y - z\nz^2\n# stats\n#   prolongations: 3\n#   minimal: false\n"

    def test_header(self):
        assert render_basis(['x'], header='# normal form') == "# normal form\n# size: 1\nx\n"

    def test_missing_template_falls_back(self):
        text = main.render_report("absent.txt", {}, ["plain"])
        assert text == "plain\n"


@patch('main.setup_logging')
class TestCommands:
    def run_cli(self, *argv):
        out = StringIO()
        with patch.dict('os.environ', {}, clear=True), patch('main.load_dotenv'):
            code = run(list(argv), stdout=out)
        return code, out.getvalue()

    def test_minimal_janet_basis(self, mock_logging):
        code, out = self.run_cli('basis', 'minimal-janet', problem('monomial_x1x2.txt'))

        assert code == EXIT_OK
        assert out == "# size: 4\nx1*x3^2\nx1*x2\nx2*x3\nx3^2\n"

    def test_janet_basis_with_stats(self, mock_logging):
        code, out = self.run_cli('basis', 'janet', problem('nonminimal_janet.txt'), '--stats', '--verify')

        assert code == EXIT_OK
        lines = out.splitlines()
        assert lines[0] == "# size: 6"
        assert set(lines[1:7]) == {
            'x^2*y - z', 'x^2*z - z^3', 'y^2*z - y', 'y*z^2 - z', 'x*y - y*z', 'x*z - z^2'}
        assert "#   minimal: false" in lines
        assert any(line.startswith("#   prolongations: ") for line in lines)

    def test_groebner_basis(self, mock_logging):
        code, out = self.run_cli('basis', 'groebner', problem('nonminimal_janet.txt'), '--verify')

        assert code == EXIT_OK
        assert out.splitlines()[0] == "# size: 4"

    def test_pj_autoreduction(self, mock_logging):
        code, out = self.run_cli('autoreduce', problem('pj_reduction.txt'), '--stats')

        assert code == EXIT_OK
        assert "# size: 3" in out
        assert "#   input: 5" in out
        assert "#   output: 3" in out

    def test_normal_form(self, mock_logging):
        code, out = self.run_cli('nf', problem('monomial_x1x2.txt'), '--poly', 'x1^2*x2 + x1*x3^2', '--mode', 'j')

        assert code == EXIT_OK
        assert out == "# normal form\n# size: 1\nx1*x3^2\n"

    def test_check(self, mock_logging):
        assert self.run_cli('check', 'finite-pommaret', problem('monomial_x1x2.txt')) == (EXIT_OK, "false\n")
        assert self.run_cli('check', 'groebner', problem('monomial_x1x2.txt')) == (EXIT_OK, "true\n")

    def test_check_needs_autoreduced_input(self, mock_logging, tmp_path):
        path = tmp_path / 'dup.txt'
        path.write_text("vars: x, y\npolys:\nx*y - 1\nx*y + y\n")

        code, _ = self.run_cli('check', 'janet', str(path))
        assert code == EXIT_PRECONDITION

    def test_separation(self, mock_logging):
        code, out = self.run_cli('separation', problem('monomial_x1x2.txt'))

        assert code == EXIT_OK
        assert out == (
            "# division: janet\n"
            "# size: 3\n"
            "x1*x2: M = {x1, x2, x3}, NM = {}\n"
            "x2*x3: M = {x2, x3}, NM = {x1}\n"
            "x3^2: M = {x3}, NM = {x1, x2}\n"
        )

    def test_hilbert(self, mock_logging):
        code, out = self.run_cli('hilbert', problem('monomial_x1x2.txt'), '--degree', '3')

        assert code == EXIT_OK
        assert out == (
            "HF_ideal(3) = 7\n"
            "HF_quotient(3) = 3\n"
            "Hilbert polynomial: 3\n"
            "Krull dimension: 1\n"
            "Hilbert series: (2*t^3 - 3*t^2 + 1) / (1 - t)^3\n"
        )

    def test_pommaret_truncate(self, mock_logging):
        code, out = self.run_cli('pommaret-truncate', problem('monomial_x1x2.txt'), '--maxdeg', '3')

        assert code == EXIT_OK
        lines = out.splitlines()
        assert lines[0] == "# finite pommaret basis: false"
        assert lines[1] == "# size: 6"
        assert {'x1^2*x2', 'x2^2*x3'} <= set(lines)

    def test_truncation_below_top_degree(self, mock_logging):
        code, _ = self.run_cli('pommaret-truncate', problem('monomial_x1x2.txt'), '--maxdeg', '2')
        assert code == EXIT_PRECONDITION

    def test_diff_basis(self, mock_logging):
        code, out = self.run_cli('basis', 'janet', problem('diff_heat.txt'))

        assert code == EXIT_OK
        assert out == "# size: 2\ny[x1] - y\ny[x2] - y\n"

    def test_diff_mode_unsupported_command(self, mock_logging):
        code, _ = self.run_cli('hilbert', problem('diff_heat.txt'), '--degree', '2')
        assert code == EXIT_PRECONDITION

    def test_parse_error(self, mock_logging, tmp_path, capsys):
        path = tmp_path / 'bad.txt'
        path.write_text("vars: x, y\npolys:\nx + w\n")

        code, out = self.run_cli('basis', 'janet', str(path))

        assert code == EXIT_PARSE
        assert out == ""
        assert "line 3, column 5" in capsys.readouterr().err

    def test_empty_body(self, mock_logging, tmp_path):
        path = tmp_path / 'empty.txt'
        path.write_text("vars: x\npolys:\n")
        assert self.run_cli('basis', 'janet', str(path))[0] == EXIT_PARSE

    def test_missing_file(self, mock_logging, tmp_path):
        assert self.run_cli('basis', 'janet', str(tmp_path / 'absent.txt'))[0] == EXIT_PARSE

    def test_missing_config(self, mock_logging, tmp_path):
        code, _ = self.run_cli('--config', str(tmp_path / 'absent.yaml'), 'basis', 'janet', problem('monomial_x1x2.txt'))
        assert code == EXIT_PARSE

    def test_verification_failure(self, mock_logging):
        with patch('main.ideal_equal', return_value=False):
            code, _ = self.run_cli('basis', 'janet', problem('nonminimal_janet.txt'), '--verify')
        assert code == EXIT_VERIFICATION

    @pytest.mark.parametrize('kind', ['janet', 'minimal-janet', 'groebner'])
    @pytest.mark.parametrize('name', SMALL_PROBLEMS)
    def test_verify_every_problem(self, mock_logging, name, kind):
        code, out = self.run_cli('basis', kind, problem(name), '--verify')
        assert code == EXIT_OK
        assert out.startswith("# size: ")

    @pytest.mark.parametrize('kind', ['janet', 'minimal-janet', 'groebner'])
    def test_diff_verification_runs_the_oracle(self, mock_logging, kind):
        with patch('main.ideal_equal', return_value=False):
            code, _ = self.run_cli('basis', kind, problem('diff_heat.txt'), '--verify')
        assert code == EXIT_VERIFICATION

        with patch('main.buchberger', wraps=main.buchberger) as oracle:
            code, _ = self.run_cli('basis', 'janet', problem('diff_two_unknowns.txt'), '--verify')
        assert code == EXIT_OK
        assert oracle.called

    @pytest.mark.parametrize('argv', [
        ('basis', 'janet', 'nonminimal_janet.txt', '--stats'),
        ('autoreduce', 'pj_reduction.txt', '--mode', 'pj'),
        ('hilbert', 'monomial_x1x2.txt', '--degree', '4'),
        ('basis', 'minimal-janet', 'diff_two_unknowns.txt'),
    ])
    def test_output_is_deterministic(self, mock_logging, argv):
        command = [problem(a) if a.endswith('.txt') else a for a in argv]
        first, second = self.run_cli(*command), self.run_cli(*command)
        assert first[0] == EXIT_OK
        assert first == second

    def test_config_enables_verification(self, mock_logging):
        config = copy.deepcopy(DEFAULT_CONFIG)
        config['basis']['verify'] = True
        with patch('main.load_config', return_value=config), patch('main.ideal_equal', return_value=False):
            code, _ = self.run_cli('basis', 'minimal-janet', problem('nonminimal_janet.txt'))
        assert code == EXIT_VERIFICATION


@patch('main.setup_logging')
class TestBenchmarkCommand:
    def setup_method(self):
        self.config = copy.deepcopy(DEFAULT_CONFIG)

    def run_cli(self, *argv):
        out = StringIO()
        with patch('main.load_config', return_value=self.config):
            code = run(list(argv), stdout=out)
        return code, out.getvalue()

    def test_records_and_lists_runs(self, mock_logging, tmp_path):
        self.config['benchmarks']['database'] = str(tmp_path / 'bench.db')

        code, out = self.run_cli('benchmark', problem('monomial_x1x2.txt'), '--command', 'groebner')
        assert code == EXIT_OK
        assert out.startswith("monomial_x1x2 groebner size 3 time ")

        code, out = self.run_cli('benchmark', '--history')
        assert code == EXIT_OK
        assert "monomial_x1x2  groebner  size 3" in out

    def test_empty_history(self, mock_logging, tmp_path):
        self.config['benchmarks']['database'] = str(tmp_path / 'bench.db')
        assert self.run_cli('benchmark', '--history') == (EXIT_OK, "No benchmark runs recorded.\n")

    def test_needs_problem_file(self, mock_logging, tmp_path):
        self.config['benchmarks']['database'] = str(tmp_path / 'bench.db')
        assert self.run_cli('benchmark')[0] == EXIT_PRECONDITION

    def test_unrecorded_timing_is_logged(self, mock_logging, tmp_path, caplog):
        self.config['benchmarks']['database'] = str(tmp_path / 'bench.db')

        with patch('main.record_timing', return_value=False), caplog.at_level(logging.WARNING):
            code, out = self.run_cli('benchmark', problem('monomial_x1x2.txt'), '--command', 'groebner')

        assert code == EXIT_OK
        assert out.startswith("monomial_x1x2 groebner size 3 time ")
        assert "was not recorded" in caplog.text


class TestParser:
    def test_global_flags_before_command(self):
        args = build_parser().parse_args(['--verbose', 'basis', 'janet', 'f.txt', '--no-criterion'])
        assert args.verbose
        assert args.no_criterion
        assert args.kind == 'janet'

    def test_benchmark_target(self):
        args = build_parser().parse_args(['benchmark', 'f.txt', '--command', 'minimal-janet'])
        assert args.command == 'benchmark'
        assert args.target == 'minimal-janet'

    def test_unknown_kind(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(['basis', 'pommaret', 'f.txt'])
