"""
SVG output shared by the apps.

Figures are rendered off-screen and written without timestamps and with a
fixed id salt, so the same data always gives the same file.
"""

from pathlib import Path

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402

SVG_RC = {
    'svg.hashsalt': 'chemlab',
    'svg.fonttype': 'none',
    'font.size': 9,
}


def new_figure(width=6.0, height=3.5):
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(width, height))
    return fig, ax


def save_svg(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(SVG_RC):
        fig.tight_layout()
        fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    return path
