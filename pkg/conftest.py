import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "forge_system.settings")
django.setup()
