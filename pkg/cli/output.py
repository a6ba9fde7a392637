"""
Console helpers shared by the commands
"""
import sys
from typing import NoReturn

from rich.console import Console
from rich.markup import escape

from proxnet.core.exceptions import ProxNetException

console = Console()
err_console = Console(stderr=True)


def fail(e: ProxNetException) -> NoReturn:
    """Print the error and exit with the code it carries."""
    err_console.print(f"[red]Error:[/red] {escape(e.message)}")
    sys.exit(e.exit_code)
