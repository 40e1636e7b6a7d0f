import json
import sys

from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from stochflow.core.exceptions import ConfigurationError
from stochflow.scenarios.runner import (EXIT_INVALID, EXIT_OK, run_scenario,
                                        validate_scenario, validation_error)


class Command(BaseCommand):
    help = "Run or validate a scenario config."

    def add_arguments(self, parser):
        commands = parser.add_subparsers(dest="action")
        commands.required = True

        run = commands.add_parser("run", help="Run a scenario and write its "
                                              "output directory.")
        run.add_argument("config", help="Path to the scenario JSON file.")
        run.add_argument("--strict", action="store_true",
                         help="Fail with exit status 4 on quadrature or "
                              "resolution warnings and failed checks.")
        run.add_argument("--workers", type=int, default=None,
                         help="Worker threads; changes speed, not results.")
        run.add_argument("--output-dir", dest="output_dir", default=None,
                         help="Directory for the results. Defaults to the "
                              "config's output.directory, then to "
                              "STOCHFLOW_OUTPUT_ROOT/<config name>.")

        validate = commands.add_parser("validate", help="Check a scenario and "
                                                        "print it resolved.")
        validate.add_argument("config", help="Path to the scenario JSON file.")

    def handle(self, *args, **options):
        if options["action"] == "run":
            code = self.run(options)
        else:
            code = self.validate(options)
        if code != EXIT_OK:
            raise SystemExit(code)

    def fail(self, error):
        sys.stderr.write(json.dumps(error, sort_keys=True) + "\n")

    def run(self, options):
        workers = options["workers"]
        if workers is not None and workers < 1:
            raise CommandError("--workers must be at least 1.")
        outcome = run_scenario(options["config"],
                               output_dir=options["output_dir"],
                               strict=options["strict"], workers=workers)
        if outcome.error is not None:
            self.fail(outcome.error)
        else:
            self.stdout.write("Wrote %s to %s" % (
                ", ".join(sorted(outcome.artifacts)), outcome.output_dir))
        for record in outcome.warnings:
            self.stderr.write("%(category)s: %(message)s" % record)
        return outcome.exit_code

    def validate(self, options):
        try:
            resolved = validate_scenario(options["config"])
        except serializers.ValidationError as error:
            self.fail(validation_error(error))
            return EXIT_INVALID
        except ConfigurationError as error:
            self.fail(error.as_dict())
            return EXIT_INVALID
        self.stdout.write(json.dumps(resolved, indent=2, sort_keys=True))
        return EXIT_OK
