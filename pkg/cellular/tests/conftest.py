import os
import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "sg_mimo.settings")
django.setup()
