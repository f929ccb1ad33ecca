from brandt.ideals import class_set
from brandt.management.base import BrandtCommand
from brandt.orders import build_order
from brandt.serializers import ClassSetSerializer


class Command(BrandtCommand):
    help = 'Enumerate the right ideal classes of an order'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_order_arguments(parser)
        parser.add_argument('--q', type=int, default=None, help='Neighbor prime')
        parser.add_argument('--budget', type=int, default=None, help='Maximum ideals visited')

    def run(self, *args, **options):
        order = build_order(options['disc'], options['level'], **self.order_options(options))
        classes = class_set(order, q=options['q'], budget=options['budget'], use_cache=not options['no_cache'])
        text = classes.to_text() if options['verbosity'] > 1 else '\n'.join([
            f"h {classes.h}",
            f"e {' '.join(str(e) for e in classes.unit_orders)}",
            f"mass {classes.mass}",
        ])
        self.emit(ClassSetSerializer(classes), text)
