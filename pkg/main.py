# main.py
# Punto de entrada del toolkit de modelos de plaquetas (SPM / TPM)

import argparse
import json
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from config import RunConfig, get_settings, merge_settings, validate_settings
from core.correlators import multispin_infinite, multispin_plus_finite, plus_lower_bound
from core.f2cycles import (bottom_row_check, cycle_space, cycle_sum_bound, economic_decomposition_check,
                           screening_ratio, screening_region, spm_stripe_basis, tpm_pascal_basis,
                           weighted_cycle_sum)
from core.lengths import (ell_cavity_estimate, ell_mix_estimate, ell_multispin, ell_renorm, fit_slopes,
                          length_records, length_series)
from core.magnetization import (magnetization_brute_force, magnetization_decay_scan,
                                magnetization_plus_exact)
from core.mcmc import ChainRunner, defect_density_observable, spin_product_observable
from core.renorm import decimation_check
from core.shadows import minimal_decomposition
from core.verification import verify_all
from models.boundary import BoundaryCondition
from models.errors import ConfigError, PlaquetteError
from models.lattice import ModelKind, ModelSpec, Region, sites_from_json
from models.results import QuantityRecord
from models.specs import ChainSpec, Dynamics, RenormSpec
from utils.helpers import (emit_csv, emit_json, format_value, print_banner, records_to_frame,
                           setup_logging, summarize)

logger = logging.getLogger("plaquettes")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


# --- utilidades de argumentos ---

def _model(args) -> ModelSpec:
    return ModelSpec.from_name(args.model, args.width or 2, args.height or 2)


def _sites(args) -> List:
    if args.sites is None:
        raise ConfigError("Falta --sites")
    data = json.loads(args.sites) if isinstance(args.sites, str) else args.sites
    return sites_from_json(data)


def _floats(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    if isinstance(text, list):
        return [float(v) for v in text]
    return [float(v) for v in text.split(',') if v.strip()]


def _ints(text) -> Optional[List[int]]:
    values = _floats(text)
    return [int(v) for v in values] if values is not None else None


def _require(args, *names: str):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise ConfigError(f"Faltan parámetros: {', '.join('--' + m.replace('_', '-') for m in missing)}")


def _output(args, payload: Dict[str, Any]):
    if args.json:
        print(emit_json(payload, args.out if args.out and not args.out.endswith('.csv') else None))


# --- subcomandos ---

def cmd_multispin(args, settings) -> int:
    _require(args, 'beta')
    model = _model(args)
    sites = _sites(args)
    if args.finite:
        _require(args, 'ell')
        region = Region.centered_box(args.ell)
        value = multispin_plus_finite(model, region, sites, args.beta, config=settings)
        n, bound = plus_lower_bound(model, region, sites, args.beta)
        print(f"μ+([σ]_A) en [−{args.ell},{args.ell}]² = {format_value(value)}")
        print(f"cota inferior tanh(β/2)^{n} = {format_value(bound)}")
        record = QuantityRecord(model.name, repr(region), args.beta, 'plus', 'multispin', value)
        _output(args, {**record.to_dict(), 'n': n, 'lower_bound': bound})
        return EXIT_OK

    result = multispin_infinite(model, sites, args.beta)
    print(f"μ([σ]_A) = {format_value(result.value)}")
    print(f"n(A) = {result.n if result.n is not None else 'no equivalente a ∅'}")
    _output(args, {'model': model.name, 'beta': args.beta, **result.to_dict()})
    return EXIT_OK


def cmd_decompose(args, settings) -> int:
    model = _model(args)
    decomposition = minimal_decomposition(model, _sites(args))
    if decomposition is None:
        print("A no es equivalente a ∅")
        _output(args, {'model': model.name, 'equivalent': False})
        return EXIT_OK
    print(f"n(A) = {decomposition.size}")
    for base in sorted(decomposition.bases):
        print(f"  B* + {tuple(base)}")
    _output(args, {'equivalent': True, **decomposition.to_dict()})
    return EXIT_OK


def cmd_renorm_check(args, settings) -> int:
    _require(args, 'beta', 'N')
    if args.model == 'tpm':
        spec = RenormSpec.tpm(args.n if args.n is not None else 1)
    elif args.model == 'spm':
        _require(args, 'ell')
        spec = RenormSpec.spm(args.ell)
    else:
        raise ConfigError("renorm-check solo admite --model spm o tpm")
    report = decimation_check(spec, args.N, args.beta, config=settings)
    discrepancy = f"{report.max_discrepancy:.1e}".replace("e+0", "e").replace("e-0", "e-")
    print(f"β′ = {format_value(report.beta_prime)}")
    print(f"max discrepancy {discrepancy} {'PASS' if report.ok else 'FAIL'}")
    _output(args, report.to_dict())
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_magnetization(args, settings) -> int:
    threshold = args.threshold if args.threshold is not None else settings['magnetization']['threshold']
    if args.scan:
        _require(args, 'beta')
        ells = _ints(args.ells) or list(range(1, 33))
        table = magnetization_decay_scan(args.beta, ells, threshold)
        print(emit_csv(table[['beta', 'ell', 'value']], args.out), end='')
        return EXIT_OK

    _require(args, 'beta', 'ell')
    result = magnetization_plus_exact(args.ell, args.beta)
    print(f"μ+(σ_0) ℓ={args.ell} β={args.beta} = {format_value(result.value)}")
    payload = result.to_dict()
    if args.brute_force:
        brute = magnetization_brute_force(args.ell, args.beta, settings)
        print(f"enumeración = {format_value(brute.value)}")
        payload['brute_force'] = brute.value
    _output(args, payload)
    return EXIT_OK


def cmd_lengths(args, settings) -> int:
    model = _model(args)
    lengths = settings['lengths']
    betas = _floats(args.betas) or ([args.beta] if args.beta is not None else None)
    if not betas:
        raise ConfigError("Falta --betas o --beta")

    estimates = []
    for beta in betas:
        estimates.append(ell_multispin(model, beta, lengths['multispin_threshold']))
        estimates.append(ell_renorm(model, beta, lengths['renorm_beta_threshold']))
        if args.with_cavity:
            estimates.append(ell_cavity_estimate(model, beta, lengths['u'], lengths['ratio'],
                                                 max_ell=lengths['max_ell'], seed=args.seed or 0,
                                                 config=settings))
        if args.with_mix:
            estimates.append(ell_mix_estimate(model, beta, lengths['eps0'],
                                              max_ell=lengths['mix_max_ell'], config=settings))
    print(emit_csv(length_records(estimates), args.out), end='')

    if args.emit_plotdata:
        series = length_series(model, betas, lengths['multispin_threshold'], lengths['renorm_beta_threshold'])
        emit_csv(series, args.emit_plotdata)
        if len(betas) > 1:
            fits = [f.to_dict() for f in fit_slopes(series)]
            emit_json(fits, os.path.splitext(args.emit_plotdata)[0] + '.fits.json')
    return EXIT_OK


def cmd_mcmc_validate(args, settings) -> int:
    _require(args, 'beta', 'seed')
    model = _model(args)
    mcmc = settings['mcmc']
    torus = (args.torus_width, args.torus_height) if args.torus_width else None
    region = Region.box((0, 0), args.box or 16, args.box or 16) if torus is None else Region.box((0, 0), *torus)
    bc = BoundaryCondition.free() if args.free else BoundaryCondition.all_plus()
    dynamics = Dynamics(args.dynamics or mcmc['dynamics'])

    observables: Dict[str, Callable] = {'defects': defect_density_observable(args.ring)}
    sites = _sites(args) if args.sites is not None else None
    if sites:
        observables['multispin'] = spin_product_observable(sites)

    specs = [ChainSpec(model, region, args.beta, bc, dynamics, args.seed,
                       args.sweeps or mcmc['sweeps'], args.burn_in if args.burn_in is not None else mcmc['burn_in'],
                       args.thinning or mcmc['thinning'], torus=torus, chain_id=k)
             for k in range(args.chains)]
    results = ChainRunner(settings).run_many(specs, observables)

    frames = []
    for k, result in enumerate(results):
        frame = result.to_frame()
        frame.insert(0, 'chain', k)
        frames.append(frame)
    print(emit_csv(pd.concat(frames, ignore_index=True), args.out), end='')

    summary = {'chains': [r.summary() for r in results]}
    if sites:
        summary['infinite_volume'] = multispin_infinite(model, sites, args.beta).to_dict()
    print(emit_json(summary, args.summary), file=sys.stderr)
    return EXIT_OK


def cmd_cycles_audit(args, settings) -> int:
    _require(args, 'n')
    model = _model(args)
    cap = settings['enumeration']['cycle_generator_cap']
    if model.kind == ModelKind.TPM:
        basis = tpm_pascal_basis(args.n)
    elif model.kind == ModelKind.SPM:
        basis = spm_stripe_basis(args.n)
    else:
        basis = cycle_space(model, screening_region(ModelSpec.spm(), args.n))
    generic = cycle_space(model, basis.region)
    rows = {'model': model.name, 'n': args.n, 'generators': len(basis.generators), 'rank': basis.rank,
            'kernel_rank': generic.rank}
    ok = basis.rank == generic.rank
    if model.kind != ModelKind.RECT:
        for t in _floats(args.t) or [0.1, 0.5, 0.9]:
            lhs = weighted_cycle_sum(basis, t, skip_empty=True, cap=cap)
            bound = cycle_sum_bound(args.n, t)
            rows[f"sum_t={t}"] = {'lhs': lhs, 'bound': bound, 'ok': lhs <= bound}
            ok &= lhs <= bound
    if model.kind == ModelKind.TPM:
        rows['bottom_row'] = bottom_row_check(args.n)
        ok &= rows['bottom_row']
    if model.kind == ModelKind.SPM:
        report = economic_decomposition_check(args.n)
        rows['economic'] = {'checked': report.checked, 'counterexamples': report.counterexamples}
        ok &= report.ok
    for key, value in rows.items():
        print(f"{key}: {value}")
    _output(args, {**rows, 'ok': ok})
    return EXIT_OK if ok else EXIT_FAILED


def cmd_screening(args, settings) -> int:
    _require(args, 'n', 'beta')
    report = screening_ratio(_model(args), args.n, args.beta, config=settings)
    print(f"cociente {format_value(report.ratio)} cota {format_value(report.bound)} "
          f"[{report.exactness.value}] {'PASS' if report.ok else 'FAIL'}")
    if report.expansion_ratio is not None:
        print(f"desarrollo de alta temperatura {format_value(report.expansion_ratio)}")
    _output(args, report.to_dict())
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_verify_all(args, settings) -> int:
    print_banner("verify-all" + (" --quick" if args.quick else ""))
    only = args.only.split(',') if args.only else None
    checks = verify_all(settings, args.quick, args.seed if args.seed is not None else 2024, only)
    for c in checks:
        print(f"[{'PASS' if c['ok'] else 'FAIL'}] {c['group']}: {c['name']}")
    summary = summarize(checks)
    print(f"{summary['passed']}/{summary['total']} comprobaciones superadas")
    if args.out:
        emit_csv(records_to_frame(checks, ['group', 'name', 'ok']), args.out)
    _output(args, {'summary': summary, 'checks': checks})
    return EXIT_OK if not summary['failed'] else EXIT_FAILED


COMMANDS: Dict[str, Callable] = {
    'multispin': cmd_multispin,
    'decompose': cmd_decompose,
    'renorm-check': cmd_renorm_check,
    'magnetization': cmd_magnetization,
    'lengths': cmd_lengths,
    'mcmc-validate': cmd_mcmc_validate,
    'cycles-audit': cmd_cycles_audit,
    'screening': cmd_screening,
    'verify-all': cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help='Configuración de ejecución JSON ("schema": 1)')
    common.add_argument('--settings', type=str, help='settings.json alternativo')
    common.add_argument('--json', action='store_true', help='Emitir también un bloque JSON')
    common.add_argument('--out', type=str, help='Fichero de salida (CSV o JSON)')
    common.add_argument('--threads', type=int, help='Número máximo de procesos')
    common.add_argument('--seed', type=int, help='Semilla (obligatoria en subcomandos estocásticos)')
    common.add_argument('--log-level', type=str, help='Nivel de logging')
    common.add_argument('--model', choices=['spm', 'tpm', 'rect'], default=None)
    common.add_argument('--width', type=int)
    common.add_argument('--height', type=int)
    common.add_argument('--beta', type=float)

    parser = argparse.ArgumentParser(description='Toolkit de modelos de plaquetas SPM/TPM')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('multispin', parents=[common], help='μ([σ]_A) en volumen infinito o con borde más')
    p.add_argument('--sites', type=str, help='JSON [[x1,x2],...]')
    p.add_argument('--finite', action='store_true', default=None)
    p.add_argument('--ell', type=int)

    p = sub.add_parser('decompose', parents=[common], help='Descomposición mínima en plaquetas')
    p.add_argument('--sites', type=str)

    p = sub.add_parser('renorm-check', parents=[common], help='Identidad de decimación exacta')
    p.add_argument('--ell', type=int)
    p.add_argument('--n', type=int)
    p.add_argument('--N', type=int)

    p = sub.add_parser('magnetization', parents=[common], help='μ+(σ_0) en [−ℓ,ℓ]²')
    p.add_argument('--ell', type=int)
    p.add_argument('--ells', type=str)
    p.add_argument('--scan', action='store_true')
    p.add_argument('--brute-force', action='store_true')
    p.add_argument('--threshold', type=float)

    p = sub.add_parser('lengths', parents=[common], help='Longitudes críticas (CSV beta,kind,lo,hi,flag)')
    p.add_argument('--betas', type=str)
    p.add_argument('--with-cavity', action='store_true')
    p.add_argument('--with-mix', action='store_true')
    p.add_argument('--emit-plotdata', type=str)

    p = sub.add_parser('mcmc-validate', parents=[common], help='Cadenas de Glauber/Metropolis')
    p.add_argument('--sites', type=str)
    p.add_argument('--box', type=int)
    p.add_argument('--torus-width', type=int)
    p.add_argument('--torus-height', type=int)
    p.add_argument('--free', action='store_true')
    p.add_argument('--dynamics', choices=['heat-bath', 'metropolis'])
    p.add_argument('--sweeps', type=int)
    p.add_argument('--burn-in', type=int)
    p.add_argument('--thinning', type=int)
    p.add_argument('--chains', type=int, default=1)
    p.add_argument('--ring', type=int, default=2)
    p.add_argument('--summary', type=str, help='Fichero del resumen JSON')

    p = sub.add_parser('cycles-audit', parents=[common], help='Bases del espacio de ciclos y sus cotas')
    p.add_argument('--n', type=int)
    p.add_argument('--t', type=str)

    p = sub.add_parser('screening', parents=[common], help='Cociente de apantallamiento frente a su cota')
    p.add_argument('--n', type=int)

    p = sub.add_parser('verify-all', parents=[common], help='Batería de aceptación completa')
    p.add_argument('--quick', action='store_true')
    p.add_argument('--only', type=str, help='Grupos separados por comas')
    return parser


_RUN_CONFIG_FIELDS = {
    'model': 'model', 'width': 'width', 'height': 'height', 'beta': 'beta', 'betas': 'betas',
    'sites': 'sites', 'ell': 'ell', 'ells': 'ells', 'n': 'n', 'N': 'N', 'seed': 'seed',
    'threads': 'threads', 'finite': 'finite', 'threshold': 'threshold', 'sweeps': 'sweeps',
    'burn_in': 'burn_in', 'thinning': 'thinning', 'dynamics': 'dynamics',
}


def apply_run_config(args, run: RunConfig):
    """Los valores del fichero rellenan los argumentos que no se dieron en la línea de comandos."""
    if run.command and run.command != args.command:
        raise ConfigError(f"La configuración es para '{run.command}', no para '{args.command}'")
    for field_name, attr in _RUN_CONFIG_FIELDS.items():
        value = getattr(run, field_name)
        if value is not None and hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)


def load_run_config(path: str) -> RunConfig:
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"No se pudo leer la configuración {path}: {e}")
    return RunConfig.model_validate(data)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = get_settings(args.settings)
        run = load_run_config(args.config) if args.config else None
        if run is not None:
            settings = merge_settings(settings, run.settings)
            apply_run_config(args, run)
        args.model = args.model or 'spm'
        if args.threads:
            settings['parallel']['threads'] = args.threads
        errors = validate_settings(settings)
        if errors:
            raise ConfigError("; ".join(errors))

        setup_logging(args.log_level or settings['logging']['level'], settings['logging'].get('file') or None)
        logger.debug(f"Subcomando {args.command} con semilla {args.seed}")
        return COMMANDS[args.command](args, settings)
    except ValidationError as e:
        logger.error(f"Configuración de ejecución inválida: {e}")
        return EXIT_USAGE
    except PlaquetteError as e:
        logger.error(f"Error en {args.command}: {e}")
        return EXIT_USAGE
    except json.JSONDecodeError as e:
        logger.error(f"JSON mal formado: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
