from django.core.management.base import BaseCommand, CommandError

from cellular.exceptions import InfeasibleDesignError, InvalidParameterError
from cellular.services import design, export
from cellular.services.interference import NetworkModel
from cellular.services.schemes import qam

EXIT_USAGE = 2
EXIT_INFEASIBLE = 4


class Command(BaseCommand):
    help = "Rank MIMO configurations that meet an ASEP or outage constraint."

    def add_arguments(self, parser):
        parser.add_argument("--streams", type=int, required=True, help="Streams per cell (m_i)")
        parser.add_argument("--max-outage", type=float, help="Outage probability bound")
        parser.add_argument("--theta-db", type=float, help="SIR threshold for --max-outage, in dB")
        parser.add_argument("--max-asep", type=float, help="ASEP bound")
        parser.add_argument("--mod", type=int, default=4, help="QAM order for --max-asep")
        parser.add_argument("--schemes", nargs="+", help="Candidate scheme tags (default: all)")
        parser.add_argument("--max-nt", type=int, help="Transmit antenna budget")
        parser.add_argument("--max-nr", type=int, help="Receive antenna budget")
        parser.add_argument("--lambda-b", type=float, default=10.0, help="BS intensity per km^2")
        parser.add_argument("--p", type=float, default=1.0, help="BS activity factor")
        parser.add_argument("--eta", type=float, default=4.0, help="Path-loss exponent")
        parser.add_argument("--power-dbm", type=float, default=30.0)
        parser.add_argument("--n0-dbm", type=float, default=-90.0)
        parser.add_argument("--csv", help="Also write the ranked table to this CSV file")

    def _constraint(self, options):
        if options.get("max_outage") is not None and options.get("max_asep") is not None:
            raise CommandError("--max-outage and --max-asep are mutually exclusive", returncode=EXIT_USAGE)
        if options.get("max_outage") is not None:
            if options.get("theta_db") is None:
                raise CommandError("--max-outage needs --theta-db", returncode=EXIT_USAGE)
            return design.MaxOutage(options["max_outage"], 10.0 ** (options["theta_db"] / 10.0))
        if options.get("max_asep") is not None:
            return design.MaxAsep(options["max_asep"], qam(options["mod"]))
        raise CommandError("one of --max-outage or --max-asep is required", returncode=EXIT_USAGE)

    def handle(self, *args, **options):
        budget = {k: options[o] for k, o in (("Nt", "max_nt"), ("Nr", "max_nr")) if options.get(o)}
        try:
            query = design.DesignQuery(
                constraint=self._constraint(options),
                required_streams=options["streams"],
                net=NetworkModel.from_units(options["lambda_b"], options["p"], options["eta"],
                                            options["power_dbm"], options["n0_dbm"]),
                candidate_schemes=design.candidate_tags(options.get("schemes")),
                antenna_budget=budget or None,
            )
        except InvalidParameterError as e:
            raise CommandError(str(e), returncode=EXIT_USAGE)

        try:
            answer = design.select(query)
        except InfeasibleDesignError as e:
            raise CommandError(f"infeasible: {e}", returncode=EXIT_INFEASIBLE)

        self.stdout.write(design.render_table(answer))
        if options.get("csv"):
            export.write_rows(design.as_rows(answer), options["csv"], header=design.query_line(query) + "\n")
            self.stdout.write(f"wrote {options['csv']}")
