from django.core.management.base import CommandError

from brandt.fixtures import load_fixtures
from brandt.hecke import HeckeModule
from brandt.management.base import EXIT_FALSIFIED, EXIT_UNKNOWN, BrandtCommand
from brandt.serializers import QExpansionSerializer, ThetaKernelSerializer
from brandt.theta import theta_entry, theta_kernel_dimension, theta_new_span


class Command(BrandtCommand):
    help = 'Theta series of the Brandt module of an order'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_order_arguments(parser)
        parser.add_argument('--prec', type=int, required=True, help='Last coefficient index B')
        parser.add_argument('--new', action='store_true', help='Project to the N-new cusp space')
        parser.add_argument('--kernel', action='store_true',
                            help='Report the kernel of theta on the N-new space')
        parser.add_argument('--fixtures', default=None, help='Fixture file for the predicted kernel')

    def run(self, *args, **options):
        module = HeckeModule.build(
            options['disc'], options['level'], jobs=options['jobs'], use_cache=not options['no_cache'],
            **self.order_options(options),
        )
        if options['kernel']:
            return self.kernel(module, options)
        if not options['new']:
            for i in range(1, module.h + 1):
                for j in range(i, module.h + 1):
                    series = theta_entry(module, i, j, options['prec'])
                    self.emit(QExpansionSerializer(series), series.to_text())
            return
        span = theta_new_span(module.order.discriminant, module.level, options['prec'], module=module)
        if span is None:
            raise CommandError('The N-new space could not be isolated', returncode=EXIT_UNKNOWN)
        if not span and not self.structured:
            self.stdout.write(f"no {module.level}-new theta series")
        for series in span:
            self.emit(QExpansionSerializer(series), series.to_text())

    def kernel(self, module, options):
        db = load_fixtures(options['fixtures']) if options['fixtures'] else None
        report = theta_kernel_dimension(module.order.discriminant, module.level, db=db, module=module)
        if report is None:
            raise CommandError('The N-new space could not be isolated', returncode=EXIT_UNKNOWN)
        self.emit(
            ThetaKernelSerializer(report),
            f"new {report.dim_new} theta-new {report.dim_theta_new} kernel {report.kernel} "
            f"predicted {report.predicted_kernel}",
        )
        if report.consistent is False:
            raise CommandError(
                f"Theta kernel {report.kernel} differs from the predicted {report.predicted_kernel}",
                returncode=EXIT_FALSIFIED,
            )
