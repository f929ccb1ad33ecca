from brandt.management.base import BrandtCommand
from brandt.orders import build_order
from brandt.serializers import OrderSerializer


class Command(BrandtCommand):
    help = 'Build the special order of a given level'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_order_arguments(parser)

    def run(self, *args, **options):
        order = build_order(options['disc'], options['level'], **self.order_options(options))
        self.emit(OrderSerializer(order), order.to_text())
