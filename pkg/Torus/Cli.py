"""
Command-line entry point.

    python -m Torus.Cli solve --p 4 --q 4 --theta pi/3,pi/3,pi/3 --A 0.5,0.2 --out pattern.json
    python -m Torus.Cli winding --R 10

Exit status: 0 success, 2 invalid input, 3 solver failure, 4 failed numerical check.
"""

import argparse
import math
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from Torus.Errors import CirclePatternError, InvalidAngles, InvalidArgument
from Torus.Hodge import dirichlet_energy, period_map
from Torus.LatticeExample import tri_example_report
from Torus.Mesh import (AngleStructure, build_lattice_torus, load_mesh, save_mesh,
                        uniform_angle_structure, validate_angle_structure,
                        validate_triangulation)
from Torus.Moduli import (h_tau, margins, pullback_form, sweep_grid, winding_trace,
                          write_sweep_csv)
from Torus.Pattern import solve_pattern
from Torus.Penner import crosscheck_pullback
from Utilities.ConfigReader import ConfigReader
from Utilities.Log import Log
from Utilities.Serializer import complex_pair, dumps, read_json, write_csv, write_json
from Utilities.SvgExport import export_svg

_PI_TERM = re.compile(r"^([+-]?[0-9.]*)\*?pi(?:/([0-9.]+))?$")


def parse_angle(text):
    """Radians from '1.047', 'pi/3', '2pi/3', '2*pi/3' or 'pi'."""
    token = text.strip().replace(" ", "")
    match = _PI_TERM.match(token)
    try:
        if match:
            factor = match.group(1)
            factor = float(factor) if factor not in ("", "+", "-") else float(factor + "1")
            return factor * math.pi / float(match.group(2) or 1.0)
        return float(token)
    except ValueError as err:
        raise InvalidArgument(f"cannot read angle {text!r}") from err


def parse_floats(text, count, what):
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError as err:
        raise InvalidArgument(f"cannot read {what} {text!r}") from err
    if len(values) != count:
        raise InvalidArgument(f"{what} needs {count} comma-separated values, got {text!r}")
    return values


def parse_grid(text):
    """'x0:x1:n,y0:y1:n' -> (xs, ys)"""
    axes = []
    for part in text.split(","):
        try:
            lo, hi, n = part.split(":")
            axes.append(np.linspace(float(lo), float(hi), int(n)))
        except ValueError as err:
            raise InvalidArgument(f"cannot read grid axis {part!r}; expected lo:hi:n") from err
    if len(axes) != 2:
        raise InvalidArgument(f"grid needs two axes, got {text!r}")
    return axes[0], axes[1]


@dataclass
class RunConfig:
    command: str
    p: int = 4
    q: int = 4
    mesh_path: str = None
    theta: list = field(default_factory=lambda: [math.pi / 3] * 3)
    theta_path: str = None
    A: tuple = (0.0, 0.0)
    tol: float = None
    step: float = None
    R: float = 10.0
    samples: int = None
    grid: tuple = None
    svg: str = None
    tile: int = None
    out: str = None

    @classmethod
    def from_args(cls, args):
        config = cls(args.command)
        config.p, config.q = args.p, args.q
        config.mesh_path = args.mesh
        config.theta = [parse_angle(t) for t in args.theta.split(",")]
        if len(config.theta) != 3:
            raise InvalidAngles(f"--theta needs three class angles, got {args.theta!r}")
        config.theta_path = getattr(args, "theta_file", None)
        config.A = tuple(parse_floats(args.A, 2, "--A"))
        config.tol = ConfigReader.readfloat("solver", "tol") if args.tol is None else args.tol
        config.step = ConfigReader.readfloat("finite_difference", "step") if args.step is None else args.step
        config.R = getattr(args, "R", config.R)
        samples = getattr(args, "samples", None)
        config.samples = ConfigReader.readint("winding", "samples") if samples is None else samples
        grid = getattr(args, "grid", None)
        config.grid = parse_grid(grid) if grid else None
        config.svg = getattr(args, "svg", None)
        tile = getattr(args, "tile", None)
        config.tile = ConfigReader.readint("svg", "tile") if tile is None else tile
        config.out = args.out
        config.validate()
        return config

    def validate(self):
        if not all(math.isfinite(a) for a in self.A):
            raise InvalidArgument(f"--A must be finite, got {self.A!r}")
        if not self.tol > 0:
            raise InvalidArgument(f"--tol must be positive, got {self.tol!r}")
        if not self.step > 0:
            raise InvalidArgument(f"--step must be positive, got {self.step!r}")
        if not self.R > 0:
            raise InvalidArgument(f"--R must be positive, got {self.R!r}")
        if self.samples < ConfigReader.readint("winding", "min_samples"):
            raise InvalidArgument(f"--samples is below the minimum, got {self.samples}")
        if self.tile < 1:
            raise InvalidArgument(f"--tile must be at least 1, got {self.tile}")


# ---------------------------------------------------------------------- #
#  INPUTS
# ---------------------------------------------------------------------- #

def _mesh(config):
    mesh = load_mesh(config.mesh_path) if config.mesh_path else build_lattice_torus(config.p, config.q)
    report = validate_triangulation(mesh)
    if not report.passed:
        failure = report.first_failure
        raise InvalidArgument(f"mesh check failed: {failure.name} ({failure.detail})")
    return mesh


def _angles(config, mesh):
    if config.theta_path:
        document = read_json(config.theta_path)
        try:
            angles = AngleStructure(mesh, document["theta"])
        except (KeyError, TypeError) as err:
            raise InvalidAngles(f"{config.theta_path} has no \"theta\" list") from err
        except ValueError as err:
            raise InvalidAngles(f"{config.theta_path}: {err}") from err
    else:
        angles = uniform_angle_structure(mesh, *config.theta)
    report = validate_angle_structure(mesh, angles)
    if not report.passed:
        failure = report.first_failure
        raise InvalidAngles(f"{failure.name}: {failure.detail}")
    return angles


def _emit(document, out):
    if out:
        write_json(document, out)
    else:
        sys.stdout.write(dumps(document))


# ---------------------------------------------------------------------- #
#  SUBCOMMANDS
# ---------------------------------------------------------------------- #

def cmd_mesh_gen(config):
    mesh = build_lattice_torus(config.p, config.q)
    if config.out:
        save_mesh(mesh, config.out)
    else:
        sys.stdout.write(dumps(mesh.to_dict()))


def cmd_solve(config):
    mesh = _mesh(config)
    pattern = solve_pattern(mesh, _angles(config, mesh), *config.A, tol=config.tol)
    _emit(pattern.to_dict(), config.out)
    print(f"residual={pattern.residual:.3e}", file=sys.stderr)
    return pattern


def cmd_develop(config):
    pattern = cmd_solve(config)
    if config.svg:
        export_svg(pattern, config.tile, config.svg)


def cmd_periodmap(config):
    mesh = _mesh(config)
    pattern = solve_pattern(mesh, _angles(config, mesh), *config.A, tol=config.tol)
    h_x = period_map(pattern)
    diagnostics = {
        "A": list(pattern.A),
        "tau": complex_pair(pattern.tau),
        "energies": [dirichlet_energy(h_x.weights, eta) for eta in h_x.forms],
        "h_tau": h_tau(pattern.tau).matrix,
    }
    if not pattern.is_euclidean:
        energy_margin, norm_margin = margins(pattern, h_x)
        diagnostics.update(lam=pullback_form(pattern, h_x).lam,
                           min_energy_margin=energy_margin, min_norm_margin=norm_margin)
    _emit(h_x.as_dict(**diagnostics), config.out)


def cmd_symplectic(config):
    mesh = _mesh(config)
    angles = _angles(config, mesh)
    xs, ys = config.grid if config.grid else ([config.A[0]], [config.A[1]])
    rows = sweep_grid(mesh, angles, xs, ys)
    if config.out and config.out.endswith(".csv"):
        write_sweep_csv(rows, config.out)
    else:
        _emit({"rows": rows, "min_abs_lam": min((abs(r["lam"]) for r in rows), default=None)}, config.out)


def cmd_winding(config):
    mesh = _mesh(config)
    trace = winding_trace(mesh, _angles(config, mesh), config.R, config.samples)
    if config.out:
        write_json({"R": trace.R, "samples": trace.samples, "winding": trace.winding,
                    "total_argument": trace.total_argument, "closure": trace.closure,
                    "w": [complex_pair(w) for w in trace.w]}, config.out)
    print(f"winding={trace.winding}")


def cmd_crosscheck(config):
    mesh = _mesh(config)
    angles = _angles(config, mesh)
    points = [(x, y) for y in config.grid[1] for x in config.grid[0]] if config.grid else [config.A]
    rows = []
    for A1, A2 in points:
        if A1 == 0 and A2 == 0:
            continue
        pattern = solve_pattern(mesh, angles, A1, A2, tol=config.tol)
        rows.append(crosscheck_pullback(pattern, ((1.0, 0.0), (0.0, 1.0)), config.step).as_row())
    columns = ["A1", "A2", "step", "via_penner", "via_holonomy", "relerr"]
    if config.out and config.out.endswith(".csv"):
        write_csv(rows, columns, config.out)
    else:
        _emit({"rows": rows}, config.out)


def cmd_tri_example(config):
    mesh = _mesh(config)
    _emit(tri_example_report(mesh, *config.theta), config.out)


COMMANDS = {
    "mesh-gen": cmd_mesh_gen,
    "solve": cmd_solve,
    "develop": cmd_develop,
    "periodmap": cmd_periodmap,
    "symplectic": cmd_symplectic,
    "winding": cmd_winding,
    "crosscheck": cmd_crosscheck,
    "tri-example": cmd_tri_example,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mesh", help="mesh document (JSON); defaults to a lattice torus")
    common.add_argument("--p", type=int, default=4)
    common.add_argument("--q", type=int, default=4)
    common.add_argument("--theta", default="pi/3,pi/3,pi/3", help="class angles E1,E2,E3")
    common.add_argument("--theta-file", help="per-edge angles document {\"theta\": [...]}")
    common.add_argument("--A", default="0.5,0.2", help="holonomy stretches A1,A2")
    common.add_argument("--tol", type=float)
    common.add_argument("--step", type=float)
    common.add_argument("--out")

    parser = argparse.ArgumentParser(prog="circle-patterns", description=__doc__.splitlines()[1])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("mesh-gen", "solve", "periodmap", "tri-example"):
        sub.add_parser(name, parents=[common])
    develop = sub.add_parser("develop", parents=[common])
    develop.add_argument("--svg")
    develop.add_argument("--tile", type=int)
    symplectic = sub.add_parser("symplectic", parents=[common])
    symplectic.add_argument("--grid", help="x0:x1:n,y0:y1:n")
    winding = sub.add_parser("winding", parents=[common])
    winding.add_argument("--R", type=float, default=10.0)
    winding.add_argument("--samples", type=int)
    crosscheck = sub.add_parser("crosscheck", parents=[common])
    crosscheck.add_argument("--grid", help="x0:x1:n,y0:y1:n")
    return parser


def run(config):
    COMMANDS[config.command](config)
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.from_args(args)
        status = run(config)
    except CirclePatternError as err:
        Log.logger.error(f"{args.command} failed: {err.code}: {err}")
        print(f"error {err.code}: {err}", file=sys.stderr)
        return err.exit_code
    Log.logger.info(f"{args.command} finished")
    return status


if __name__ == "__main__":
    sys.exit(main())
