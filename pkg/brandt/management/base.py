import logging

from django.core.management.base import BaseCommand, CommandError

from brandt.exceptions import (
    BrandtError,
    BudgetExceededError,
    ConsistencyError,
    MassMismatchError,
)
from brandt.orders import EType
from brandt.serializers import render

logger = logging.getLogger(__name__)

# Exit codes shared by every command
EXIT_FALSIFIED = 1
EXIT_USAGE = 2
EXIT_UNKNOWN = 3


def prime_map(values, cast, name):
    """Parse repeated P:VALUE flags into {P: cast(VALUE)}."""
    result = {}
    for value in values or []:
        prime, sep, setting = value.partition(':')
        if not sep or not prime.isdigit():
            raise CommandError(f"--{name} expects P:VALUE, got {value!r}", returncode=EXIT_USAGE)
        try:
            result[int(prime)] = cast(setting)
        except ValueError:
            raise CommandError(f"--{name}: invalid value {setting!r} at {prime}", returncode=EXIT_USAGE)
    return result


def etype(value):
    if value not in EType.values:
        raise ValueError(value)
    return EType(value)


class BrandtCommand(BaseCommand):
    """
    Shared flags (--format, --jobs, --no-cache) and the exit-code contract:
    usage and fixture errors exit 2, falsification 1, inconclusive 3.
    """

    def add_arguments(self, parser):
        parser.add_argument('--format', choices=['text', 'structured'], default='text',
                            help='Output format')
        parser.add_argument('--jobs', type=int, default=None, help='Worker processes')
        parser.add_argument('--no-cache', action='store_true', help='Do not read or write the class-set cache')

    def add_order_arguments(self, parser):
        parser.add_argument('--disc', type=int, required=True, help='Discriminant D of the algebra')
        parser.add_argument('--level', type=int, required=True, help='Level N of the order')
        parser.add_argument('--etype', action='append', default=[],
                            help='P:unramified or P:ramified, repeatable')
        parser.add_argument('--variant', action='append', default=[],
                            help='P:0 or P:1 choosing the ramified E at odd P, repeatable')

    def order_options(self, options):
        return {
            'etypes': prime_map(options['etype'], etype, 'etype'),
            'variants': prime_map(options['variant'], int, 'variant'),
        }

    def handle(self, *args, **options):
        self.structured = options['format'] == 'structured'
        try:
            return self.run(*args, **options)
        except (ConsistencyError, MassMismatchError) as e:
            logger.error(f"{self.__module__}: {e}")
            raise CommandError(str(e), returncode=EXIT_FALSIFIED)
        except BudgetExceededError as e:
            raise CommandError(str(e), returncode=EXIT_UNKNOWN)
        except BrandtError as e:
            raise CommandError(str(e), returncode=EXIT_USAGE)

    def run(self, *args, **options):
        raise NotImplementedError

    def emit(self, serializer, text):
        """Write one structured line or the text form."""
        self.stdout.write(render(serializer) if self.structured else text)
