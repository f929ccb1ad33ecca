import hashlib
import json
import logging

import redis
from django.conf import settings
from django.core.cache import cache

logger = logging.getLogger(__name__)

_redis_client = None
_redis_checked = False


def get_redis_client():
    """
    Redis client for REDIS_URL, or None when Redis is not configured or unreachable.

    The lookup happens once per process; later calls reuse the outcome.
    """
    global _redis_client, _redis_checked
    if _redis_checked:
        return _redis_client
    _redis_checked = True
    if not settings.REDIS_URL:
        return None
    try:
        client = redis.from_url(settings.REDIS_URL)
        client.ping()
        _redis_client = client
    except (redis.exceptions.ConnectionError, ValueError) as e:
        logger.warning(f"Redis connection failed ({e}). Using Django cache as fallback.")
        _redis_client = None
    return _redis_client


def classset_key(order, q):
    """Cache key classset:{a}:{b}:{order-hash}:{q}."""
    digest = hashlib.sha256(order.to_text().encode('utf-8')).hexdigest()[:16]
    return f"classset:{order.algebra.a}:{order.algebra.b}:{digest}:{q}"


def store_classset(key, record):
    """
    Store a class-set record in Redis, falling back to Django's cache.

    Args:
        key: cache key from classset_key()
        record: JSON-serializable dict
    """
    payload = json.dumps(record, sort_keys=True)
    timeout = settings.BRANDT_CACHE_TIMEOUT
    client = get_redis_client()
    if client is not None:
        try:
            client.setex(key, timeout, payload)
            return
        except redis.exceptions.RedisError as e:
            logger.error(f"Redis error storing class set: {e}")
    try:
        cache.set(key, payload, timeout=timeout)
        logger.info(f"Class set stored in Django cache: {key}")
    except Exception as e:
        logger.error(f"Cache error storing class set: {e}")


def load_classset(key):
    """
    Fetch a class-set record from Redis or Django's cache.

    Returns:
        dict or None on a miss
    """
    client = get_redis_client()
    if client is not None:
        try:
            payload = client.get(key)
            if payload:
                logger.debug(f"Redis hit for {key}")
                return json.loads(payload.decode('utf-8'))
        except redis.exceptions.RedisError as e:
            logger.error(f"Redis error reading class set: {e}")

    try:
        payload = cache.get(key)
        if payload:
            logger.debug(f"Cache hit for {key}")
            return json.loads(payload)
    except Exception as e:
        logger.error(f"Cache error reading class set: {e}")
    return None
