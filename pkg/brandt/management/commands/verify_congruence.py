from django.core.management.base import CommandError

from brandt.fixtures import load_fixtures
from brandt.management.base import EXIT_FALSIFIED, EXIT_UNKNOWN, BrandtCommand
from brandt.oracle import congruence_check, congruent_fixture_forms
from brandt.serializers import CongruenceSerializer


class Command(BrandtCommand):
    help = 'Eisenstein congruence mod p on the p^3-new Brandt module of discriminant p'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--p', type=int, required=True, help='Odd prime p')
        parser.add_argument('--primes', type=int, nargs='+', default=[2, 3, 7, 11, 13], help='Test primes ell')
        parser.add_argument('--fixtures', default=None,
                            help='Fixture file; lists the p^3 newforms satisfying the congruence')

    def run(self, *args, **options):
        p = options['p']
        result = congruence_check(p, options['primes'], jobs=options['jobs'], use_cache=not options['no_cache'])
        if result is None:
            raise CommandError(f"The {p ** 3}-new space could not be isolated", returncode=EXIT_UNKNOWN)
        lines = [
            f"p {p} primes {' '.join(map(str, result.primes))}",
            f"new dimension {result.new_dimension} common kernel mod {p}: {result.kernel_dimension}",
            f"congruence {'holds' if result.holds else 'fails'}",
        ]
        if options['fixtures']:
            labels = congruent_fixture_forms(load_fixtures(options['fixtures']), p, result.primes)
            lines.append(f"congruent fixture forms: {' '.join(labels) or '-'}")
        self.emit(CongruenceSerializer(result), '\n'.join(lines))
        if not result.holds:
            raise CommandError(f"No eigensystem congruent to Eisenstein mod {p}", returncode=EXIT_FALSIFIED)
