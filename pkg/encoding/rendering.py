"""Picture of the encoded plate, one tinted disc per well."""

import numpy as np
from PIL import Image, ImageDraw

# RGB tint per analyte, cycled for larger sets
TINTS = [(220, 60, 40), (40, 170, 70), (50, 90, 220), (200, 160, 20), (150, 60, 190), (20, 170, 180)]
WELL_PX = 12
BACKGROUND = (245, 245, 245)
EMPTY = (210, 210, 210)


def well_colour(concentrations, analyte_ids, peaks):
    """Blend the analyte tints weighted by concentration relative to each analyte's peak"""
    colour = np.zeros(3)
    weight = 0.0
    for index, analyte_id in enumerate(analyte_ids):
        peak = peaks.get(analyte_id, 0.0)
        if peak <= 0:
            continue
        share = concentrations.get(analyte_id, 0.0) / peak
        colour += share * np.array(TINTS[index % len(TINTS)])
        weight += share
    if weight <= 0:
        return (255, 255, 255)
    level = min(weight, 1.0)
    mixed = colour / weight
    return tuple(int(round(c)) for c in level * mixed + (1 - level) * np.array([255, 255, 255]))


def render_plate(plate, analyte_ids=None):
    """Return a PIL image of ``plate``; call ``.save(path)`` to write a PNG"""
    analyte_ids = list(analyte_ids) if analyte_ids is not None else plate.analyte_ids()
    contents = {address: well.concentrations() for address, well in plate.filled()}
    peaks = {
        analyte_id: max((c.get(analyte_id, 0.0) for c in contents.values()), default=0.0)
        for analyte_id in analyte_ids
    }
    image = Image.new('RGB', (plate.cols * WELL_PX + 2, plate.rows * WELL_PX + 2), BACKGROUND)
    draw = ImageDraw.Draw(image)
    for address in plate.addresses():
        x0, y0 = 1 + address.col * WELL_PX, 1 + address.row * WELL_PX
        box = (x0 + 1, y0 + 1, x0 + WELL_PX - 2, y0 + WELL_PX - 2)
        if address in contents:
            draw.ellipse(box, fill=well_colour(contents[address], analyte_ids, peaks), outline=(120, 120, 120))
        else:
            draw.ellipse(box, fill=None, outline=EMPTY)
    return image
