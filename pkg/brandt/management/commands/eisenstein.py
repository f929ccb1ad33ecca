from brandt.management.base import BrandtCommand
from brandt.serializers import QExpansionSerializer
from brandt.theta import eisenstein_q_expansion


class Command(BrandtCommand):
    help = 'q-expansion of the weight 2 Eisenstein series E_2,a,b'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--a', type=int, required=True)
        parser.add_argument('--b', type=int, required=True)
        parser.add_argument('--prec', type=int, required=True, help='Last coefficient index')

    def run(self, *args, **options):
        series = eisenstein_q_expansion(options['a'], options['b'], options['prec'])
        self.emit(QExpansionSerializer(series), series.to_text())
