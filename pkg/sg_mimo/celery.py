import os

from celery import Celery

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "sg_mimo.settings")

app = Celery("sg_mimo")
app.config_from_object("django.conf:settings", namespace="CELERY")
app.autodiscover_tasks()
