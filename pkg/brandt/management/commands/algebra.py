from brandt.algebra import construct_definite
from brandt.management.base import BrandtCommand
from brandt.serializers import AlgebraSerializer


class Command(BrandtCommand):
    help = 'Construct the definite quaternion algebra of a discriminant'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--disc', type=int, required=True, help='Squarefree D with an odd number of primes')

    def run(self, *args, **options):
        algebra = construct_definite(options['disc'])
        text = '\n'.join([
            algebra.to_text(),
            f"discriminant {algebra.discriminant}",
            f"ramified {' '.join(str(p) for p in algebra.ramified_primes)} inf",
        ])
        self.emit(AlgebraSerializer(algebra), text)
