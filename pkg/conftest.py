# Test collection wiring for pytest: configure Django the way `manage.py test` does,
# including the in-memory stub broker the settings select for test runs.
import os

import django
from django.conf import settings

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'euler_alignment.settings')

settings.DRAMATIQ_BROKER['BROKER'] = 'dramatiq.brokers.stub.StubBroker'
settings.DRAMATIQ_BROKER['OPTIONS'] = {}
django.setup()
