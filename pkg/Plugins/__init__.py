"""
Command plugins registered on the ``defderivative`` group.
"""

from Plugins.check import check_command
from Plugins.derive import derive_command
from Plugins.tools import eval_command, registry_list_command, simplify_command

COMMANDS = [
    derive_command,
    check_command,
    eval_command,
    simplify_command,
    registry_list_command,
]
