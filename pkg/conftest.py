import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "ffwd_project.settings")
django.setup()

collect_ignore = ["examples"]
