from fractions import Fraction
from functools import wraps
import json
import logging
import math
import sys

import click
import numpy as np

from pyspl import __version__
from pyspl.config import RunConfig, load_config
from pyspl.consts import DEFAULT_ARC_SAMPLES, DEFAULT_BASIS_SIZE, ENV_OUT_DIR
from pyspl.disk import even_mode_profile, negative_form_even, radial_partition_data, radial_spectrum, spectral_flow_odd
from pyspl.families import FAMILIES
from pyspl.nodal import extract_nodal_partition
from pyspl.numerics import NumericalError
from pyspl.partition import DomainKind, orient_interfaces
from pyspl.plap import assemble_plap, solve_eigs
from pyspl.rect import (courant_sharp_22, degenerate_pairs, dtn_negative_profile_22, rect_eigenvalue,
                        rect_spectral_position, solve_gamma_pair)
from pyspl.report import ReportWriter, partition_svg
from pyspl.search import SearchFailed, disk_cut_search, rect_cut_search
from pyspl.variation import (HelmholtzSolver, bump_basis, criticality, dtn_form_matrix, family_first_variation,
                             fd_oracle, second_variation_c3)

logger = logging.getLogger(__name__)

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def format_output(result):
    print(json.dumps(result, default=str, sort_keys=True))


def handle_errors(f):
    @wraps(f)
    def wrapper(*args, **kwargs):
        try:
            result = f(*args, **kwargs)
        except ValueError as e:
            logger.error(f"{type(e).__name__}: {str(e)}")
            sys.exit(EXIT_VALIDATION)
        except NumericalError as e:
            logger.error(f"{type(e).__name__}: {str(e)}")
            sys.exit(EXIT_NUMERICAL)
        format_output(result)
    return wrapper


def _writer(obj, command: str, config: dict, tolerances: dict = None) -> ReportWriter:
    return ReportWriter(obj["out_dir"], command, config, tolerances)


def _config(path: str) -> RunConfig:
    cfg = load_config(path)
    logger.info(f"Loaded {path}: {cfg.kind}, grid {cfg.n}")
    return cfg


@click.group(chain=False)
@click.pass_context
@click.option('--out-dir', envvar=ENV_OUT_DIR, default=".", show_default=True, type=click.Path(file_okay=False),
              help="Directory for all output files")
@click.option('-o', '--log-output', required=False, type=click.Path(), help="Path to the log output file")
@click.option('--debug', is_flag=True, help="Enable debug logging")
@click.option('--verbose', is_flag=True, help="Enable verbose logging")
@click.version_option(version=__version__)
def cli(ctx, out_dir, log_output, debug, verbose):
    ctx.obj = {"out_dir": out_dir}

    logging_level = logging.WARNING
    if verbose:
        logging_level = logging.DEBUG if debug else logging.INFO
    logging.basicConfig(level=logging_level,
                        filename=log_output)


@cli.command("rect-gamma")
@click.pass_obj
@click.option('--alpha', type=float, default=1.5, show_default=True, help="Aspect ratio, 5/3 < alpha^2 < 4")
@click.option('--samples', type=int, default=DEFAULT_ARC_SAMPLES, show_default=True, help="Samples per arc")
@handle_errors
def rect_gamma(obj, alpha, samples):
    """Solve the frequency pair of the (2,2) cross and sample its negative profile."""
    pair = solve_gamma_pair(alpha)
    profile = dtn_negative_profile_22(alpha, samples)
    writer = _writer(obj, "rect-gamma", {"alpha": alpha, "samples": samples})
    writer.write_csv("rect_gamma.csv", ["alpha", "gamma1", "gamma2", "sigma", "constraint_residual",
                                        "matching_residual"],
                     [[alpha, pair.gamma1, pair.gamma2, pair.sigma, pair.constraint_residual,
                       pair.matching_residual]])
    writer.write_csv("rect_gamma_profile.csv", ["arc", "t", "x", "y", "f"], profile.field.to_rows())
    t = np.linspace(-1.0, 1.0, 65)
    signs = {arc.id: profile.value(arc.point(t)) for arc in profile.partition.interfaces}
    writer.write_svg("rect_gamma_signs.svg", partition_svg(profile.partition, arc_signs=signs))
    writer.close()
    return {"alpha": alpha, "gamma1": pair.gamma1, "gamma2": pair.gamma2, "sigma": pair.sigma,
            "horizontal_zero": profile.horizontal_zero, "center_value": profile.center_value,
            "sign_pattern": profile.sign_pattern}


@cli.command("rect-spec")
@click.pass_obj
@click.option('--alpha', type=float, default=1.0, show_default=True, help="Aspect ratio")
@click.option('--alpha-squared', type=str, default=None, help="Exact rational alpha^2, e.g. 5/3")
@click.option('--mode', type=(click.IntRange(1), click.IntRange(1)), default=(2, 2), show_default=True,
              help="Mode indices m n")
@handle_errors
def rect_spec(obj, alpha, alpha_squared, mode):
    """Eigenvalue, spectral position and Courant sharpness of a rectangle mode."""
    exact = None
    if alpha_squared is not None:
        try:
            exact = Fraction(alpha_squared)
        except (ValueError, ZeroDivisionError) as e:
            raise click.BadParameter(str(e), param_hint="--alpha-squared")
        alpha = math.sqrt(exact)
    m, n = mode
    position, multiplicity = rect_spectral_position(m, n, alpha, exact)
    result = {"alpha": alpha, "alpha_squared": None if exact is None else str(exact), "mode": [m, n],
              "eigenvalue": rect_eigenvalue(m, n, alpha), "position": position, "multiplicity": multiplicity,
              "domains": m * n, "deficiency": position - m * n,
              "degenerate_with": [list(b) for _, b in degenerate_pairs(alpha, exact, m, n)]}
    if (m, n) == (2, 2):
        result["courant_sharp"] = courant_sharp_22(alpha, exact)
    writer = _writer(obj, "rect-spec", {"alpha": alpha, "alpha_squared": result["alpha_squared"], "mode": [m, n]})
    writer.write_json("rect_spec.json", result)
    writer.close()
    return result


@cli.command("disk-radial")
@click.pass_obj
@click.option('--k', 'k', type=click.IntRange(2, 12), required=True, help="Number of sectors")
@click.option('--spectrum', is_flag=True, help="Also list the partition Laplacian spectrum up to the energy")
@handle_errors
def disk_radial(obj, k, spectrum):
    """Energy, deficiency and negative direction of the radial k-partition."""
    data = radial_partition_data(k)
    result = {"k": k, "energy": data.energy, "position": data.position, "deficiency": data.deficiency,
              "matched_order": data.matched_order}
    if k >= 6 and k % 2 == 0:
        result["negative_form"] = negative_form_even(k)
        result["profile_form"] = even_mode_profile(k).form
    elif k >= 7:
        flow = spectral_flow_odd(k)
        result.update({"negative_form": flow.form, "sigma": flow.sigma,
                       "normalization_spread": flow.normalization_spread,
                       "contributions": flow.contributions.tolist()})
    writer = _writer(obj, "disk-radial", {"k": k, "spectrum": spectrum})
    if spectrum:
        writer.write_csv("disk_radial_spectrum.csv", ["value", "multiplicity", "order", "zero_index"],
                         radial_spectrum(k))
    writer.write_json("disk_radial.json", result)
    writer.close()
    return result


@cli.command("plap-eig")
@click.pass_obj
@click.option('-c', '--config', required=True, type=click.Path(exists=True, dir_okay=False), help="Run config file")
@click.option('--n', 'n', type=int, default=None, help="Nodes per direction and cell (config value by default)")
@click.option('--count', type=click.IntRange(1), default=6, show_default=True, help="Number of eigenpairs")
@click.option('--nodal', type=click.IntRange(1), default=None, help="Eigenpair (from 1) whose nodal set is traced")
@handle_errors
def plap_eig(obj, config, n, count, nodal):
    """Spectrum of the partition Laplacian and the nodal set of one eigenfunction."""
    cfg = _config(config)
    n = n or cfg.n
    p = cfg.partition()
    op = assemble_plap(p, n=n)
    eigen = solve_eigs(op, count, cfg.multiplicity_tol)
    writer = _writer(obj, "plap-eig", cfg.snapshot(), {"multiplicity": cfg.multiplicity_tol})
    rows = [[i + 1, eigen.values[i], eigen.positions[i], eigen.multiplicities[i], eigen.residuals[i]]
            for i in range(len(eigen.values))]
    writer.write_csv("spectrum.csv", ["index", "value", "position", "multiplicity", "residual"], rows)
    idx = (nodal or len(eigen.values)) - 1
    if idx >= len(eigen.values):
        raise click.BadParameter(f"Only {len(eigen.values)} eigenpairs computed", param_hint="--nodal")
    result = extract_nodal_partition(eigen.vectors[:, idx], op, cfg.samples)
    writer.write_nodal("plap", p, result.polylines)
    writer.close()
    return {"values": eigen.values.tolist(), "positions": eigen.positions, "nodal_index": idx + 1,
            "domain_count": result.domain_count, "deficiency": eigen.positions[idx] - result.domain_count,
            "domain_energies": result.domain_energies}


@cli.command("hessian-index")
@click.pass_obj
@click.option('-c', '--config', required=True, type=click.Path(exists=True, dir_okay=False), help="Run config file")
@click.option('--basis', type=click.IntRange(1), default=None,
              help=f"Basis functions per arc (config value, else {DEFAULT_BASIS_SIZE})")
@click.option('--n', 'n', type=int, default=None, help="Nodes per direction and cell (config value by default)")
@handle_errors
def hessian_index(obj, config, basis, n):
    """Criticality and the index of the Dirichlet-to-Neumann form of a partition."""
    cfg = _config(config)
    n = n or cfg.n
    size = basis or cfg.basis_size
    p = cfg.partition()
    frame = orient_interfaces(p)
    crit = criticality(p, frame, grid=n, strict=True)
    solver = HelmholtzSolver(p, frame, n)
    index = dtn_form_matrix(p, frame, crit, bump_basis(p, size), n, cfg.zero_tol, solver)
    writer = _writer(obj, "hessian-index", cfg.snapshot(), {"zero": cfg.zero_tol})
    writer.write_csv("dtn_gram.csv", [f"f{j}" for j in range(index.matrix.shape[1])], index.matrix.tolist())
    writer.write_csv("dtn_eigenvalues.csv", ["index", "value"], list(enumerate(index.eigenvalues)))
    result = {"negative": index.negative, "zero": index.zero, "basis_size": index.basis_size,
              "rank": index.rank, "threshold": index.threshold, "criticality_residual": crit.residual,
              "coefficients": crit.coefficients.tolist(), "defect": crit.defect}
    if p.domain.kind == DomainKind.RECTANGLE:
        result["degenerate_with_22"] = [list(b) for _, b in degenerate_pairs(cfg.alpha, cfg.alpha_squared)]
    writer.write_json("hessian_index.json", result)
    writer.close()
    return result


@cli.command("had-check")
@click.pass_obj
@click.option('--family', type=click.Choice(sorted(FAMILIES)), required=True, help="Deformation family")
@click.option('--order', type=click.IntRange(1, 2), default=1, show_default=True, help="Derivative order")
@click.option('--n', 'n', type=int, default=16, show_default=True, help="Nodes per direction and cell")
@handle_errors
def had_check(obj, family, order, n):
    """Compare the boundary formula for a shape derivative with finite differences."""
    fam = FAMILIES[family]()
    report = fd_oracle(fam, order, n)
    if order == 1:
        formula = family_first_variation(fam, n)
        parts = {}
    else:
        second = second_variation_c3(fam, n=n)
        formula = second.value
        parts = {"w_term": second.w_term, "boundary_term": second.boundary_term}
    scale = max(abs(formula), abs(report.value), 1e-300)
    result = {"family": family, "order": order, "formula": formula, "finite_difference": report.value,
              "fd_estimates": report.estimates, "fd_error": report.error, "steps": report.steps,
              "relative_difference": abs(formula - report.value) / scale, "base": report.base, **parts}
    writer = _writer(obj, "had-check", {"family": family, "order": order, "n": n})
    writer.write_json("had_check.json", result)
    writer.close()
    return result


@cli.command("cut-search")
@click.pass_obj
@click.option('--geometry', type=click.Choice(['disk', 'rect']), required=True, help="Search to run")
@click.option('--n', 'n', type=int, default=None, help="Grid size (10 for disk, 14 for rect)")
@click.option('--tol', type=float, default=None, help="Acceptance tolerance")
@click.option('--alpha', type=float, default=1.5, show_default=True, help="Rectangle aspect ratio")
@click.option('--richardson', is_flag=True, help="Extrapolate the disk energy with one more grading level")
@handle_errors
def cut_search(obj, geometry, n, tol, alpha, richardson):
    """Search for a candidate minimal partition with cuts."""
    options = {"geometry": geometry, "n": n, "tol": tol, "alpha": alpha, "richardson": richardson}
    writer = _writer(obj, "cut-search", options, {"tol": tol} if tol is not None else {})
    try:
        if geometry == "disk":
            report = disk_cut_search(n=n or 10, tol=tol or 1e-4, richardson=richardson)
        else:
            report = rect_cut_search(alpha, n=n or 14, tol=tol or 1e-3)
    except SearchFailed as e:
        width = len(e.landscape[0]) if e.landscape else 1
        header = [f"param{i}" for i in range(width - 1)] + ["residual"]
        writer.write_csv("cut_search_landscape.csv", header, e.landscape)
        writer.close()
        raise
    result = report.to_dict()
    writer.write_json("cut_search.json", result)
    writer.write_nodal("cut_search", report.partition, report.nodal.polylines)
    writer.close()
    return result


if __name__ == "__main__":
    cli()
