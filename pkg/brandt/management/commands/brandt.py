from brandt.hecke import HeckeModule, hecke_report
from brandt.management.base import BrandtCommand
from brandt.serializers import BrandtMatrixSerializer, HeckeReportSerializer


def report_text(report):
    lines = [
        f"level {report.level} discriminant {report.discriminant}",
        f"h {report.h} mass {report.mass}",
        f"e {' '.join(str(e) for e in report.unit_orders)}",
        f"eisenstein {report.eisenstein_dimension} cusp {report.cusp_dimension}",
    ]
    for ell, poly in sorted(report.cusp_charpolys.items()):
        lines.append(f"cusp charpoly A_{ell}: {poly.factored_text()}")
    for level, multiplicity, polys in report.new_parts:
        for ell, poly in sorted(polys.items()):
            lines.append(f"new {level} x{multiplicity} A_{ell}: {poly.factored_text()}")
    return '\n'.join(lines)


class Command(BrandtCommand):
    help = 'Brandt matrices A_n of an order'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_order_arguments(parser)
        parser.add_argument('--n', type=int, nargs='+', required=True, help='Indices n >= 0')
        parser.add_argument('--report', action='store_true',
                            help='Also report dimensions and char polys at the given n')

    def run(self, *args, **options):
        module = HeckeModule.build(
            options['disc'], options['level'], jobs=options['jobs'], use_cache=not options['no_cache'],
            **self.order_options(options),
        )
        module.prepare(max(options['n']))
        for n in options['n']:
            matrix = module.brandt(n)
            self.emit(BrandtMatrixSerializer(matrix), f"A_{n}\n{matrix.to_text()}")
        if options['report']:
            primes = [n for n in options['n'] if n > 1]
            report = hecke_report(module.order.discriminant, module.level, primes, module=module)
            self.emit(HeckeReportSerializer(report), report_text(report))
