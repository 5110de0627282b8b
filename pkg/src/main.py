import os
import sys
import argparse
import logging
from typing import List, Optional

from dotenv import load_dotenv

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from cli.commands import COMMANDS, EXIT_USAGE
from cli.scenario_loader import load_scenario
from cli.verification import SUITES
from core.errors import MechanismError

load_dotenv()

logging.basicConfig(
    level=os.getenv("LOG_LEVEL", "INFO").upper(),
    format='%(asctime)s - %(levelname)s - %(message)s',
)
logger = logging.getLogger(__name__)


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' no es un entero")
    if value < 1:
        raise argparse.ArgumentTypeError(f"debe ser positivo, recibido {value}")
    return value


def seed_value(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' no es un entero")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("la semilla debe ser un entero sin signo de 64 bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="Fichero JSON del escenario.")
    common.add_argument("--seed", type=seed_value, help="Sustituye la semilla del escenario.")
    common.add_argument("--samples", type=positive_int, help="Número de ejecuciones Monte Carlo.")
    common.add_argument("--grid-step", type=float, help="Paso de la rejilla del símplice.")
    common.add_argument("--out", help="Ruta del CSV de salida.")

    parser = argparse.ArgumentParser(
        prog="contract-auction",
        description="Subasta de contratos veraces para expertos con costes de investigación desconocidos",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("auction", parents=[common], help="Ejecuta el mecanismo y estima la utilidad del principal.")

    verify = sub.add_parser("verify", parents=[common], help="Ejecuta las suites de verificación.")
    verify.add_argument("--suite", action="append", choices=SUITES, help="Suite concreta (repetible).")

    plot = sub.add_parser("plot", parents=[common], help="Emite los datos de las figuras en CSV.")
    plot.add_argument("--what", required=True, choices=["curves", "payments", "maxrisk"])
    plot.add_argument("--betas", help="Lista de beta separada por comas (curves).")
    plot.add_argument("--report", help="Informe para el barrido de la tangente (payments).")
    plot.add_argument("--beta", type=float, help="Desplazamiento beta del contrato.")

    maxrisk = sub.add_parser("maxrisk", parents=[common], help="Intervalos de informes y pujas restringidas.")
    maxrisk.add_argument("--betas", help="Lista de beta separada por comas.")
    maxrisk.add_argument("--literal-argmax", action="store_true", help="Puja restringida por argmax literal.")
    maxrisk.add_argument("--refine", action="store_true", help="Refina por bisección la frontera de beta'.")

    contract = sub.add_parser("contract", parents=[common], help="Imprime el vector de pagos de un informe.")
    contract.add_argument("--report", help="Informe, p. ej. '0.9,0.1' o '0.9' si n = 2.")
    contract.add_argument("--beta", type=float, help="Desplazamiento beta del contrato.")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        scenario = load_scenario(args.scenario).with_overrides(seed=args.seed, samples=args.samples)
        return COMMANDS[args.command](scenario, args)
    except MechanismError as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
