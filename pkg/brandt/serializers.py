import json
from fractions import Fraction

from django.conf import settings
from rest_framework import serializers
from rest_framework.settings import api_settings
from sympy import isprime

from .arith import prime_divisors, valuation
from .fixtures import LocalKind


def non_field_error(message):
    # to_internal_value errors must be keyed for serializer.errors
    return serializers.ValidationError({api_settings.NON_FIELD_ERRORS_KEY: [message]})


def rational(value):
    """JSON form of a rational: integers stay integers, others become "num/den"."""
    value = Fraction(value)
    if value.denominator == 1:
        return value.numerator
    return f"{value.numerator}/{value.denominator}"


def render(serializer):
    """One structured output line: sorted keys, fixed separators."""
    return json.dumps(serializer.data, sort_keys=True, separators=(', ', ': '))


class RationalField(serializers.Field):
    """Read-only exact rational rendered as an integer or a "num/den" string."""

    def __init__(self, **kwargs):
        kwargs['read_only'] = True
        super().__init__(**kwargs)

    def to_representation(self, value):
        return rational(value)


class StrictSerializer(serializers.Serializer):
    """Rejects keys the serializer does not declare."""

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = set(data) - set(self.fields)
            if unknown:
                raise non_field_error(f"Unknown keys: {', '.join(sorted(unknown))}")
        return super().to_internal_value(data)


class LocalRepSerializer(StrictSerializer):
    """Local type of a newform at a bad prime."""
    c = serializers.IntegerField(min_value=0, required=False)
    kind = serializers.ChoiceField(choices=LocalKind.choices)
    minimal = serializers.BooleanField(required=False)

    def validate(self, data):
        if data['kind'] != LocalKind.UNKNOWN and ('c' not in data or 'minimal' not in data):
            raise serializers.ValidationError("Known local types need both 'c' and 'minimal'")
        if data['kind'] == LocalKind.STEINBERG and data['c'] != 1:
            raise serializers.ValidationError("Steinberg local types have conductor exponent 1")
        return data


class NewformRecordSerializer(StrictSerializer):
    """One newform Galois orbit: level, label, degree, a_p traces and bad local types."""
    level = serializers.IntegerField(min_value=1)
    label = serializers.CharField()
    dim = serializers.IntegerField(min_value=1)
    ap = serializers.DictField(child=serializers.IntegerField())
    bad = serializers.DictField(child=LocalRepSerializer())

    def to_internal_value(self, data):
        if isinstance(data, dict):
            numbers = [data.get('level'), data.get('dim')]
            if isinstance(data.get('ap'), dict):
                numbers.extend(data['ap'].values())
            for value in numbers:
                if value is not None and (isinstance(value, bool) or not isinstance(value, int)):
                    raise non_field_error(f"Expected a JSON integer, got {value!r}")
        return super().to_internal_value(data)

    def _prime_keys(self, value, what):
        for key in value:
            if not key.isdigit() or key.startswith('0') or not isprime(int(key)):
                raise serializers.ValidationError(f"{what} key {key!r} is not a prime")
        return value

    def validate_ap(self, value):
        return self._prime_keys(value, 'a_p')

    def validate_bad(self, value):
        return self._prime_keys(value, 'Bad prime')

    def validate(self, data):
        level, dim = data['level'], data['dim']
        bound = self.context.get('trace_bound', settings.BRANDT_TRACE_BOUND)
        for key, trace in data['ap'].items():
            p = int(key)
            if level % p and p <= bound and trace * trace > 4 * p * dim * dim:
                raise serializers.ValidationError(
                    f"|a_{p}| = {abs(trace)} exceeds the Hasse bound 2 * {dim} * sqrt({p})"
                )
        missing = set(prime_divisors(level)) - {int(key) for key in data['bad']}
        if missing:
            raise serializers.ValidationError(f"No local type given at {', '.join(map(str, sorted(missing)))}")
        for key, local in data['bad'].items():
            p = int(key)
            if level % p:
                raise serializers.ValidationError(f"Bad prime {p} does not divide the level {level}")
            if local['kind'] == LocalKind.UNKNOWN:
                continue
            if local['c'] != valuation(level, p):
                raise serializers.ValidationError(
                    f"Conductor exponent {local['c']} at {p} differs from v_p(N) = {valuation(level, p)}"
                )
            if local['kind'] == LocalKind.STEINBERG:
                trace = data['ap'].get(key)
                if trace is not None and (abs(trace) > dim or (trace - dim) % 2):
                    raise serializers.ValidationError(f"Steinberg a_{p} trace {trace} is not a sum of {dim} signs")
        return data


# Structured output records

class LocalOrderTypeSerializer(serializers.Serializer):
    prime = serializers.IntegerField()
    kind = serializers.CharField()
    exponent = serializers.IntegerField()
    variant = serializers.IntegerField()
    omega = serializers.SerializerMethodField()

    def get_omega(self, obj):
        return None if obj.omega is None else [rational(x) for x in obj.omega]


class OrderSerializer(serializers.Serializer):
    record = serializers.SerializerMethodField()
    a = RationalField(source='algebra.a')
    b = RationalField(source='algebra.b')
    discriminant = serializers.IntegerField()
    level = serializers.IntegerField()
    local_types = LocalOrderTypeSerializer(many=True)
    denominator = serializers.IntegerField(source='lattice.denominator')
    basis = serializers.ListField(child=serializers.ListField(child=serializers.IntegerField()), source='lattice.basis')

    def get_record(self, obj):
        return 'order'


class AlgebraSerializer(serializers.Serializer):
    record = serializers.SerializerMethodField()
    a = RationalField()
    b = RationalField()
    discriminant = serializers.IntegerField()
    ramified_primes = serializers.ListField(child=serializers.IntegerField())

    def get_record(self, obj):
        return 'algebra'


class ClassSetSerializer(serializers.Serializer):
    record = serializers.SerializerMethodField()
    level = serializers.IntegerField(source='order.level')
    h = serializers.IntegerField()
    q = serializers.IntegerField()
    mass = RationalField()
    unit_orders = serializers.ListField(child=serializers.IntegerField())
    norms = serializers.SerializerMethodField()
    ideals = serializers.SerializerMethodField()

    def get_record(self, obj):
        return 'classset'

    def get_norms(self, obj):
        return [rational(ideal.norm) for ideal in obj.ideals]

    def get_ideals(self, obj):
        return [
            {'denominator': ideal.lattice.denominator, 'basis': [list(row) for row in ideal.lattice.basis]}
            for ideal in obj.ideals
        ]


class BrandtMatrixSerializer(serializers.Serializer):
    record = serializers.SerializerMethodField()
    n = serializers.IntegerField()
    entries = serializers.SerializerMethodField()

    def get_record(self, obj):
        return 'brandt'

    def get_entries(self, obj):
        return [[rational(x) for x in row] for row in obj.entries]


class QExpansionSerializer(serializers.Serializer):
    label = serializers.CharField()
    precision = serializers.IntegerField()
    coefficients = serializers.SerializerMethodField()

    def get_coefficients(self, obj):
        return [rational(c) for c in obj.coefficients]


class CharPolySerializer(serializers.Serializer):
    coefficients = serializers.ListField(child=serializers.IntegerField())
    text = serializers.CharField(source='factored_text')


class HeckeReportSerializer(serializers.Serializer):
    record = serializers.SerializerMethodField()
    discriminant = serializers.IntegerField()
    level = serializers.IntegerField()
    h = serializers.IntegerField()
    mass = RationalField()
    unit_orders = serializers.ListField(child=serializers.IntegerField())
    eisenstein_dimension = serializers.IntegerField()
    cusp_dimension = serializers.IntegerField()
    charpolys = serializers.SerializerMethodField()
    cusp_charpolys = serializers.SerializerMethodField()
    new_parts = serializers.SerializerMethodField()

    def get_record(self, obj):
        return 'hecke-report'

    def _polys(self, polys):
        return {str(ell): CharPolySerializer(poly).data for ell, poly in sorted(polys.items())}

    def get_charpolys(self, obj):
        return self._polys(obj.charpolys)

    def get_cusp_charpolys(self, obj):
        return self._polys(obj.cusp_charpolys)

    def get_new_parts(self, obj):
        return [
            {'level': level, 'multiplicity': multiplicity, 'charpolys': self._polys(polys)}
            for level, multiplicity, polys in obj.new_parts
        ]


class PredictionTermSerializer(serializers.Serializer):
    level = serializers.IntegerField()
    selector = serializers.CharField()
    labels = serializers.ListField(child=serializers.CharField())
    dimension = serializers.IntegerField()
    multiplicity = serializers.IntegerField(allow_null=True)
    confidence = serializers.CharField()


class DecompositionSerializer(serializers.Serializer):
    record = serializers.SerializerMethodField()
    discriminant = serializers.IntegerField()
    level = serializers.IntegerField()
    terms = PredictionTermSerializer(many=True)
    confidence = serializers.CharField()
    predicted_cusp_dimension = serializers.IntegerField(allow_null=True)
    predicted_eisenstein_dimension = serializers.IntegerField()

    def get_record(self, obj):
        return 'prediction'


class PrimeComparisonSerializer(serializers.Serializer):
    ell = serializers.IntegerField()
    predicted = CharPolySerializer(allow_null=True)
    computed = CharPolySerializer()
    status = serializers.CharField()


class VerificationSerializer(serializers.Serializer):
    record = serializers.SerializerMethodField()
    level = serializers.IntegerField()
    outcome = serializers.CharField()
    comparisons = PrimeComparisonSerializer(many=True)
    checks = serializers.SerializerMethodField()

    def get_record(self, obj):
        return 'verification'

    def get_checks(self, obj):
        return [{'name': check.name, 'status': check.status, 'detail': check.detail} for check in obj.checks]


class CongruenceSerializer(serializers.Serializer):
    record = serializers.SerializerMethodField()
    p = serializers.IntegerField()
    primes = serializers.ListField(child=serializers.IntegerField())
    new_dimension = serializers.IntegerField()
    kernel_dimension = serializers.IntegerField()
    holds = serializers.BooleanField()

    def get_record(self, obj):
        return 'congruence'


class ThetaKernelSerializer(serializers.Serializer):
    record = serializers.SerializerMethodField()
    dim_new = serializers.IntegerField()
    dim_theta_new = serializers.IntegerField()
    kernel = serializers.IntegerField()
    predicted_kernel = serializers.IntegerField(allow_null=True)

    def get_record(self, obj):
        return 'theta-kernel'
