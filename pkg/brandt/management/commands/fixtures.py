from django.core.management.base import CommandError

from brandt.exceptions import FixtureError
from brandt.fixtures import dim_new_cusp, load_fixtures
from brandt.management.base import EXIT_USAGE, BrandtCommand


class Command(BrandtCommand):
    help = 'Validate a newform fixture file'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('action', choices=['validate'])
        parser.add_argument('path', help='Line-delimited JSON fixture file')

    def run(self, *args, **options):
        try:
            db = load_fixtures(options['path'])
        except FixtureError as e:
            for number, message in e.problems:
                self.stderr.write(f"{options['path']}:{number}: {message}")
            raise CommandError(f"{len(e.problems)} problem(s) in {options['path']}", returncode=EXIT_USAGE)
        for level in db.levels:
            total = sum(record.dim for record in db.records_at(level))
            status = 'complete' if db.covers(level) else 'partial'
            self.stdout.write(f"level {level}: {total}/{dim_new_cusp(level)} {status}")
        self.stdout.write(self.style.SUCCESS(f"{len(db)} records OK"))
