import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'brandt_service.settings')
django.setup()
