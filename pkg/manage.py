#!/usr/bin/env python3
"""
Command-line entry point of the Euler-alignment simulator.

    python3 manage.py simulate {run,sweep,picard,check} <config>
    python3 manage.py test alignment
    python3 manage.py rundramatiq
"""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'euler_alignment.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the packages in requirements.txt "
            "into the active virtual environment first."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
