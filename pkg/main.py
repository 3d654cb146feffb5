import argparse
import copy
import logging
import os
import sys
import time
from logging.handlers import RotatingFileHandler
from pathlib import Path

import yaml
from dotenv import load_dotenv
from jinja2 import Environment, FileSystemLoader, select_autoescape

from src.db import get_history, init_db, record_timing
from src.diffsys import (
    encode, groebner_diff, involutive_nf_diff, is_janet_basis_diff, janet_basis_diff, minimal_janet_basis_diff,
)
from src.errors import (
    ContextError, DomainError, InputError, ParseError, PreconditionError, VerificationError,
)
from src.hilbert import format_polynomial_in, hilbert_polynomial, hilbert_series, krull_dimension
from src.involutive import (
    autoreduce_j, autoreduce_p, autoreduce_pj, cone_equality, has_finite_pommaret_basis, involutive_nf,
    is_janet_basis, is_pommaret_basis, janet_basis, janet_separation, leading_monomials,
    minimal_janet_basis, pommaret_separation, truncated_pommaret_basis,
)
from src.parser import load_problem, parse_diff_polynomial, parse_polynomial
from src.polynomials import autoreduce, buchberger, conventional_nf, ideal_equal, is_groebner_basis

TEMPLATE_DIR = Path(__file__).resolve().parent / 'templates'
DEFAULT_CONFIG_FILE = 'config/config.yaml'

DEFAULT_CONFIG = {
    'logging': {'level': 'INFO', 'file': 'logs/involutive.log'},
    'basis': {'criterion': True, 'autoreduction': 'pj', 'verify': False},
    'checks': {'degree_margin': 2},
    'benchmarks': {'database': 'data/benchmarks.db'},
}

BOOLEAN_FIELDS = {'criterion', 'verify'}
INTEGER_FIELDS = {'degree_margin'}

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_VERIFICATION = 4

DIFF_COMMANDS = {('basis', 'janet'), ('basis', 'minimal-janet'), ('basis', 'groebner'), ('nf', 'j'), ('check', 'janet')}
NF_DIVISIONS = {'j': 'janet', 'p': 'pommaret'}


def setup_logging(config, verbose=False):
    """Rotating file log (5 MB per file, keep 5 backups); --verbose mirrors it to stderr."""
    log_cfg = config.get('logging', {})
    log_file = Path(log_cfg.get('file', DEFAULT_CONFIG['logging']['file']))
    log_file.parent.mkdir(parents=True, exist_ok=True)
    level = getattr(logging, str(log_cfg.get('level', 'INFO')).upper(), logging.INFO)
    formatter = logging.Formatter('%(asctime)s %(levelname)s:%(message)s')

    log_handler = RotatingFileHandler(log_file, maxBytes=5 * 1024 * 1024, backupCount=5)
    log_handler.setLevel(level)
    log_handler.setFormatter(formatter)
    handlers = [log_handler]
    if verbose:
        stream = logging.StreamHandler(sys.stderr)
        stream.setLevel(level)
        stream.setFormatter(formatter)
        handlers.append(stream)
    logging.basicConfig(handlers=handlers, level=level, force=True)


def _apply_env_overrides(config):
    """Apply environment variable overrides to configuration.

    Environment variables should be in the format:
    INVOLUTIVE_<SECTION>_<FIELD> = value

    Examples:
    - INVOLUTIVE_BASIS_CRITERION=false overrides basis.criterion
    - INVOLUTIVE_CHECKS_DEGREE_MARGIN=3 overrides checks.degree_margin
    - INVOLUTIVE_BENCHMARKS_DATABASE overrides benchmarks.database
    """
    env_prefix = "INVOLUTIVE_"

    for env_key, env_value in os.environ.items():
        if not env_key.startswith(env_prefix):
            continue

        config_path = env_key[len(env_prefix):].lower().split('_')
        if len(config_path) < 2:
            continue

        section = config_path[0]
        field = '_'.join(config_path[1:])

        if section not in config:
            config[section] = {}

        if field in BOOLEAN_FIELDS:
            env_value = env_value.lower() in ('true', '1', 'yes', 'on')
        elif field in INTEGER_FIELDS:
            try:
                env_value = int(env_value)
            except ValueError:
                logging.warning(f"Invalid integer value in {env_key}: {env_value}")
                continue

        config[section][field] = env_value
        logging.info(f"Applied environment override: {section}.{field}")


def _merge_defaults(config):
    merged = copy.deepcopy(DEFAULT_CONFIG)
    for section, values in (config or {}).items():
        if isinstance(values, dict) and isinstance(merged.get(section), dict):
            merged[section].update(values)
        else:
            merged[section] = values
    return merged


def load_config(filename=None):
    """Load YAML configuration; a missing default file means built-in defaults."""
    load_dotenv()
    explicit = filename is not None
    filename = filename or DEFAULT_CONFIG_FILE
    try:
        with open(filename, 'r') as file:
            loaded = yaml.safe_load(file) or {}
    except FileNotFoundError:
        if explicit:
            logging.error(f"Configuration file not found: {filename}")
            raise
        loaded = {}
    except yaml.YAMLError as e:
        logging.error(f"Invalid YAML in configuration file: {e}")
        raise
    if not isinstance(loaded, dict):
        raise ValueError("Configuration must be a dictionary")
    config = _merge_defaults(loaded)
    _apply_env_overrides(config)
    validate_config(config)
    return config


def validate_config(config):
    """Validate configuration structure and value domains."""
    if not isinstance(config, dict):
        raise ValueError("Configuration must be a dictionary")

    for section in ('logging', 'basis', 'checks', 'benchmarks'):
        if not isinstance(config.get(section, {}), dict):
            raise ValueError(f"Configuration section '{section}' must be a mapping")

    level = str(config.get('logging', {}).get('level', 'INFO')).upper()
    if level not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
        raise ValueError(f"Unknown logging level: {level}")

    basis_cfg = config.get('basis', {})
    if basis_cfg.get('autoreduction', 'pj') not in ('pj', 'p'):
        raise ValueError("basis.autoreduction must be 'pj' or 'p'")
    for field in ('criterion', 'verify'):
        if not isinstance(basis_cfg.get(field, True), bool):
            raise ValueError(f"basis.{field} must be a boolean")

    margin = config.get('checks', {}).get('degree_margin', 2)
    if not isinstance(margin, int) or isinstance(margin, bool) or margin < 0:
        raise ValueError("checks.degree_margin must be a nonnegative integer")

    if not config.get('benchmarks', {}).get('database'):
        raise ValueError("benchmarks.database must name a file")

    logging.debug("Configuration validation passed")


def _format_set(items, unknowns=None):
    return [f.format(unknowns) if unknowns is not None else f.format() for f in items]


def _variable_names(indices, context):
    return [context.names[i] for i in sorted(indices)]


def _setup_jinja_environment():
    """Set up Jinja2 environment with custom filters."""
    env = Environment(
        loader=FileSystemLoader(str(TEMPLATE_DIR)),
        autoescape=select_autoescape(['html', 'xml']),
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    env.filters['varset'] = lambda names: '{' + ', '.join(names) + '}'
    env.filters['polynomial_in'] = format_polynomial_in
    env.filters['flag'] = lambda value: str(value).lower() if isinstance(value, bool) else value
    return env


def render_report(template_name, context, fallback_lines):
    """Render a report template; on template trouble fall back to plain lines."""
    env = _setup_jinja_environment()
    try:
        return env.get_template(template_name).render(context)
    except Exception as e:
        logging.error(f"Error rendering template {template_name}: {e}")
        return '\n'.join(fallback_lines) + '\n'


def render_basis(lines, stats=None, header=None):
    fallback = ([header] if header else []) + [f"# size: {len(lines)}"] + lines
    return render_report('basis.txt', {'lines': lines, 'stats': stats, 'header': header}, fallback)


# Commands

def _check_same_ideal(result, F):
    if not ideal_equal(result, F):
        raise VerificationError("Computed set and input generate different ideals")


def _verify_janet(basis, F, config):
    _check_same_ideal(basis, F)
    margin = config['checks']['degree_margin']
    bound = max(g.lm.degree for g in basis) + margin
    if not cone_equality(basis, 'janet', bound):
        raise VerificationError("Janet cones of the leading monomials do not cover their ideal")
    oracle = buchberger(F)
    if any(conventional_nf(g, basis) for g in oracle):
        raise VerificationError("Reduced Groebner basis does not reduce to zero modulo the Janet basis")


def _verify_groebner(basis, F):
    if not (is_groebner_basis(basis) and ideal_equal(basis, F)):
        raise VerificationError("Groebner basis failed the S-polynomial check")


def compute_basis(kind, problem, args, config):
    """Run one basis computation; returns (polynomials, stats dict or None)."""
    basis_cfg = config['basis']
    criterion = basis_cfg['criterion'] and not getattr(args, 'no_criterion', False)
    autoreduction = getattr(args, 'autoreduction', None) or basis_cfg['autoreduction']
    verify = args.verify or basis_cfg['verify']

    if problem.mode == 'diff':
        S = problem.system()
        stats = None
        if kind == 'janet':
            report = janet_basis_diff(S, use_criterion=criterion, autoreduction=autoreduction)
            basis, stats = report.basis, report.stats.as_dict()
        elif kind == 'minimal-janet':
            basis = minimal_janet_basis_diff(S).basis
        else:
            basis = groebner_diff(S)
        if verify:
            # the oracle runs on the module encoding of the system
            encoded, encoded_basis = [encode(f) for f in S if f], [encode(g) for g in basis]
            if kind == 'groebner':
                _verify_groebner(encoded_basis, encoded)
            else:
                _verify_janet(encoded_basis, encoded, config)
        return basis, stats

    F = problem.polynomials()
    if kind == 'janet':
        report = janet_basis(F, use_criterion=criterion, autoreduction=autoreduction)
        if verify:
            _verify_janet(report.basis, F, config)
        stats = report.stats.as_dict()
        stats['finite_pommaret'] = report.finite_pommaret
        stats['minimal'] = report.is_minimal
        return report.basis, stats
    if kind == 'minimal-janet':
        report = minimal_janet_basis(F)
        if verify:
            _verify_janet(report.basis, F, config)
        return report.basis, {'finite_pommaret': report.finite_pommaret}
    basis = buchberger(F)
    if verify:
        _verify_groebner(basis, F)
    return basis, None


def cmd_basis(args, problem, config):
    basis, stats = compute_basis(args.kind, problem, args, config)
    return render_basis(_format_set(basis), stats if args.stats else None)


def cmd_autoreduce(args, problem, config):
    F = problem.polynomials()
    if args.mode == 'pj':
        result = autoreduce_pj(F, normal_form=args.pj_normal_form)
    elif args.mode == 'p':
        result = autoreduce_p(F)
    elif args.mode == 'j':
        result = autoreduce_j(F)
    else:
        result = autoreduce(F)
    if args.verify or config['basis']['verify']:
        _check_same_ideal(result, F)
    stats = {'input': len([f for f in F if f]), 'output': len(result)} if args.stats else None
    return render_basis(_format_set(result), stats)


def cmd_nf(args, problem, config):
    if problem.mode == 'diff':
        ranking = problem.diff_ranking()
        S = problem.system(ranking)
        h = parse_diff_polynomial(args.poly, ranking)
        return render_basis([involutive_nf_diff(h, S).format()], header='# normal form')
    ring = problem.ring()
    F = problem.polynomials(ring)
    h = parse_polynomial(args.poly, ring)
    counters = {}
    if args.mode == 'conv':
        r = conventional_nf(h, F)
    else:
        r = involutive_nf(h, F, NF_DIVISIONS[args.mode], stats=counters)
    if args.verify or config['basis']['verify']:
        if conventional_nf(h - r, buchberger(F)):
            raise VerificationError("Normal form differs from the input by a non-member of the ideal")
    stats = {'reductions': counters.get('reductions', 0)} if args.stats and args.mode != 'conv' else None
    return render_basis([r.format()], stats, header='# normal form')


def cmd_check(args, problem, config):
    if problem.mode == 'diff':
        return _bool_line(is_janet_basis_diff(problem.system()))
    F = problem.polynomials()
    if args.property == 'janet':
        result = is_janet_basis(F)
    elif args.property == 'pommaret':
        result = is_pommaret_basis(F)
    elif args.property == 'groebner':
        result = is_groebner_basis(F)
    else:
        report = minimal_janet_basis(F)
        result = report.finite_pommaret
    return _bool_line(result)


def _bool_line(value):
    return 'true\n' if value else 'false\n'


def cmd_separation(args, problem, config):
    F = problem.polynomials()
    U = list(dict.fromkeys(leading_monomials(F)))
    table = janet_separation(U) if args.division == 'janet' else pommaret_separation(U)
    context = problem.context()
    rows = [
        {
            'monomial': u.format(context),
            'mult': _variable_names(mult, context),
            'nonmult': _variable_names(nm, context),
        }
        for u, mult, nm in table
    ]
    fallback = [f"{r['monomial']}: {', '.join(r['mult'])} | {', '.join(r['nonmult'])}" for r in rows]
    return render_report('separation.txt', {'division': args.division, 'rows': rows}, fallback)


def cmd_hilbert(args, problem, config):
    report = minimal_janet_basis(problem.polynomials())
    series = hilbert_series(report.basis)
    d = args.degree
    context = {
        'degree': d,
        'ideal': series.hilbert_fn(d),
        'quotient': series.quotient_hilbert_fn(d),
        'polynomial': hilbert_polynomial(series),
        'dimension': krull_dimension(series),
        'numerator': series.numerator(),
        'n': series.n,
        'cones': series.cones,
        'stats': args.stats,
    }
    fallback = [f"HF_ideal({d}) = {context['ideal']}", f"HF_quotient({d}) = {context['quotient']}"]
    return render_report('hilbert.txt', context, fallback)


def cmd_pommaret_truncate(args, problem, config):
    report = minimal_janet_basis(problem.polynomials())
    ring = report.basis[0].ring
    U = truncated_pommaret_basis(report.basis, args.maxdeg, ring.ordering)
    lines = [u.format(ring.context) for u in U]
    header = f"# finite pommaret basis: {'true' if has_finite_pommaret_basis(report.basis) else 'false'}"
    return render_basis(lines, header=header)


def cmd_benchmark(args, problem, config):
    db_path = config['benchmarks']['database']
    if not init_db(db_path):
        raise InputError(f"Cannot open benchmark database {db_path}")
    name = Path(args.file).stem if args.file else None
    if args.history:
        rows = get_history(name, args.target, db_path=db_path)
        fallback = [f"{r['recorded_at']} {r['problem']} {r['command']} {r['basis_size']} {r['seconds']:.3f}" for r in rows]
        return render_report('history.txt', {'rows': rows}, fallback)
    if problem is None:
        raise InputError("benchmark needs a problem file unless --history is given")
    target = args.target or 'janet'
    started = time.perf_counter()
    basis, _ = compute_basis(target, problem, args, config)
    seconds = time.perf_counter() - started
    if not record_timing(name, target, len(basis), seconds, db_path=db_path):
        logging.warning(f"Timing for {target} on {name} was not recorded in {db_path}")
    return f"{name} {target} size {len(basis)} time {seconds:.3f}s\n"


COMMANDS = {
    'basis': cmd_basis,
    'autoreduce': cmd_autoreduce,
    'nf': cmd_nf,
    'check': cmd_check,
    'separation': cmd_separation,
    'hilbert': cmd_hilbert,
    'pommaret-truncate': cmd_pommaret_truncate,
    'benchmark': cmd_benchmark,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog='involutive', description="Janet, Pommaret and Groebner bases of polynomial ideals")
    parser.add_argument('--config', help="YAML configuration file (default config/config.yaml)")
    parser.add_argument('--verbose', action='store_true', help="mirror the log to stderr")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--stats', action='store_true', help="append computation counters")
    common.add_argument('--verify', action='store_true', help="cross-check against the Buchberger oracle")

    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('basis', parents=[common], help="compute a basis")
    p.add_argument('kind', choices=['janet', 'minimal-janet', 'groebner'])
    p.add_argument('file')
    p.add_argument('--autoreduction', choices=['pj', 'p'])
    p.add_argument('--no-criterion', action='store_true')

    p = sub.add_parser('autoreduce', parents=[common], help="autoreduce the input set")
    p.add_argument('file')
    p.add_argument('--mode', choices=['pj', 'p', 'j', 'conv'], default='pj')
    p.add_argument('--pj-normal-form', choices=['janet', 'pommaret'], default='janet')

    p = sub.add_parser('nf', parents=[common], help="normal form of a polynomial")
    p.add_argument('file')
    p.add_argument('--mode', choices=['j', 'p', 'conv'], default='j')
    p.add_argument('--poly', required=True)

    p = sub.add_parser('check', parents=[common], help="basis predicates")
    p.add_argument('property', choices=['janet', 'pommaret', 'groebner', 'finite-pommaret'])
    p.add_argument('file')

    p = sub.add_parser('separation', parents=[common], help="multiplicative variables")
    p.add_argument('file')
    p.add_argument('--division', choices=['janet', 'pommaret'], default='janet')

    p = sub.add_parser('hilbert', parents=[common], help="Hilbert function")
    p.add_argument('file')
    p.add_argument('--degree', type=int, required=True)

    p = sub.add_parser('pommaret-truncate', parents=[common], help="truncated Pommaret completion")
    p.add_argument('file')
    p.add_argument('--maxdeg', type=int, required=True)

    p = sub.add_parser('benchmark', parents=[common], help="time a basis computation")
    p.add_argument('file', nargs='?')
    p.add_argument('--command', dest='target', choices=['janet', 'minimal-janet', 'groebner'])
    p.add_argument('--history', action='store_true')
    return parser


def _diff_key(args):
    if args.command == 'basis':
        return ('basis', args.kind)
    if args.command == 'nf':
        return ('nf', args.mode)
    if args.command == 'check':
        return ('check', args.property)
    return (args.command, None)


def run(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except (OSError, ValueError, yaml.YAMLError) as e:
        print(f"error: configuration: {e}", file=sys.stderr)
        return EXIT_PARSE
    setup_logging(config, args.verbose)
    logging.info(f"Running {args.command}")

    try:
        problem = None
        if getattr(args, 'file', None):
            problem = load_problem(args.file)
            if problem.mode == 'diff' and args.command != 'benchmark' and _diff_key(args) not in DIFF_COMMANDS:
                raise PreconditionError(f"'{args.command}' is not available for differential systems")
        output = COMMANDS[args.command](args, problem, config)
    except ParseError as e:
        logging.error(f"Parse error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as e:
        logging.error(f"Cannot read input: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except VerificationError as e:
        logging.error(f"Verification failed: {e}")
        print(f"error: verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFICATION
    except (ContextError, DomainError, InputError, PreconditionError) as e:
        logging.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION

    stdout.write(output)
    logging.info(f"Finished {args.command}")
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
