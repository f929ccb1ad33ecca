from django.conf import settings
from django.core.management.base import CommandError

from brandt.fixtures import load_fixtures
from brandt.hecke import HeckeModule
from brandt.management.base import EXIT_FALSIFIED, EXIT_UNKNOWN, BrandtCommand
from brandt.oracle import Outcome, predict_decomposition, verify_decomposition
from brandt.serializers import DecompositionSerializer, VerificationSerializer


def verification_text(report):
    lines = [f"outcome {report.outcome}"]
    for comparison in report.comparisons:
        predicted = comparison.predicted.factored_text() if comparison.predicted else '-'
        lines.append(
            f"A_{comparison.ell}: predicted {predicted} computed {comparison.computed.factored_text()} "
            f"[{comparison.status}]"
        )
    for check in report.checks:
        lines.append(f"check {check.name}: {check.status} {check.detail}".rstrip())
    return '\n'.join(lines)


class Command(BrandtCommand):
    help = 'Predict the Brandt module decomposition from fixture data and verify it'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_order_arguments(parser)
        parser.add_argument('--fixtures', default=None, help='Newform fixture file (BRANDT_FIXTURES)')
        parser.add_argument('--primes', type=int, nargs='+', default=[2, 3, 5, 7], help='Test primes')

    def run(self, *args, **options):
        db = load_fixtures(options['fixtures'] or settings.BRANDT_FIXTURES)
        module = HeckeModule.build(
            options['disc'], options['level'], jobs=options['jobs'], use_cache=not options['no_cache'],
            **self.order_options(options),
        )
        prediction = predict_decomposition(module.order.discriminant, module.level, db, order=module.order)
        self.emit(DecompositionSerializer(prediction), prediction.to_text())
        report = verify_decomposition(prediction, module, options['primes'])
        self.emit(VerificationSerializer(report), verification_text(report))
        if report.outcome == Outcome.FALSIFIED:
            raise CommandError(f"Prediction falsified at level {module.level}", returncode=EXIT_FALSIFIED)
        if report.outcome == Outcome.UNKNOWN:
            raise CommandError(f"Cannot conclude at level {module.level}", returncode=EXIT_UNKNOWN)
