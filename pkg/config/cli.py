"""
``glowvc`` entry point.

Maps hyphenated subcommands onto the management commands and returns the
exit status: 0 on success, 1 on a runtime failure, 2 on bad usage.
"""

import os
import sys

SUBCOMMANDS = {
    'synth-data': 'synth_data',
    'extract-features': 'extract_features',
    'train': 'train',
    'convert': 'convert',
    'tts': 'tts',
    'eval': 'eval',
    'gradcheck': 'gradcheck',
}

USAGE = 'usage: glowvc {%s} [options]' % ','.join(SUBCOMMANDS)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] in ('-h', '--help'):
        sys.stderr.write(USAGE + '\n')
        return 0 if argv else 2
    if argv[0] not in SUBCOMMANDS:
        sys.stderr.write(f'{USAGE}\nunknown subcommand {argv[0]!r}\n')
        return 2

    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    import django
    from django.core.management import get_commands, load_command_class

    django.setup()
    name = SUBCOMMANDS[argv[0]]
    command = load_command_class(get_commands()[name], name)
    try:
        command.run_from_argv(['glowvc', argv[0], *argv[1:]])
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
