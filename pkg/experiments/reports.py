"""
Report output: CSV tables, JSON summaries, SVG plots and an Excel workbook.

Everything is written with fixed float formats and without timestamps so two
runs with the same seed produce identical files.
"""

import json
from pathlib import Path

import numpy as np
import openpyxl
from django.conf import settings
from openpyxl.styles import Alignment, Font
from openpyxl.utils import get_column_letter
from scipy.stats import norm

from chemlab.plotting import new_figure, save_svg


def float_format():
    return settings.CHEMLAB['OUTPUT']['float_format']


def ensure_dir(path):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(frame, path):
    frame.to_csv(path, index=False, float_format=float_format(), lineterminator='\n')
    return path


def write_json(data, path):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + '\n', encoding='utf-8')
    return path


def write_xlsx(sheets, path):
    """One worksheet per table, bold centered headers"""
    wb = openpyxl.Workbook()
    wb.remove(wb.active)
    for title, frame in sheets.items():
        ws = wb.create_sheet(title=title[:31])
        for col, header in enumerate(frame.columns, 1):
            cell = ws.cell(row=1, column=col, value=str(header))
            cell.font = Font(bold=True)
            cell.alignment = Alignment(horizontal='center')
        for row_num, row in enumerate(frame.itertuples(index=False), 2):
            for col, value in enumerate(row, 1):
                if isinstance(value, (np.generic,)):
                    value = value.item()
                ws.cell(row=row_num, column=col, value=value)
        for col, header in enumerate(frame.columns, 1):
            ws.column_dimensions[get_column_letter(col)].width = max(12, len(str(header)) + 2)
    wb.save(path)
    return path


def scatter_svg(expected, measured, path, xlabel, ylabel, title=''):
    """Measured against expected with the y = x line"""
    fig, ax = new_figure(4.2, 4.0)
    expected = np.asarray(expected, dtype=float)
    measured = np.asarray(measured, dtype=float)
    ax.scatter(expected, measured, s=8, color='tab:blue')
    if len(expected):
        lo = min(expected.min(), measured.min())
        hi = max(expected.max(), measured.max())
        ax.plot([lo, hi], [lo, hi], linestyle='--', linewidth=0.7, color='grey')
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    return save_svg(fig, path)


def histogram_svg(errors, stats, path, xlabel, title=''):
    """Error histogram with the fitted normal density"""
    fig, ax = new_figure(4.5, 3.5)
    errors = np.asarray(errors, dtype=float)
    if len(errors):
        ax.hist(errors, bins=30, density=True, color='lightsteelblue', edgecolor='white')
        if stats.sd > 0:
            grid = np.linspace(errors.min(), errors.max(), 200)
            ax.plot(grid, norm.pdf(grid, stats.mean, stats.sd), color='black', linewidth=0.9)
    ax.set_xlabel(xlabel)
    ax.set_ylabel('Density')
    ax.set_title(title or f"mean {stats.mean:.3f}, 3σ {stats.three_sigma:.3f}")
    return save_svg(fig, path)


def weight_map_svg(classifier, path, width=None):
    fig, ax = new_figure(3.6, 3.2)
    image = ax.imshow(classifier.weight_map(width), cmap='coolwarm', vmin=-1, vmax=1)
    fig.colorbar(image, ax=ax, fraction=0.046)
    ax.set_xticks([])
    ax.set_yticks([])
    ax.set_title(f"classifier {classifier.foreground}")
    return save_svg(fig, path)
