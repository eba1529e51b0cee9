#!/usr/bin/env python3
"""Rasterize a simplified mainland-Italy outline into the habitat PGM.

Equirectangular projection (x scaled by cos of the mean latitude). Grey
levels: 255 habitable land, 128 mountain obstacle, 0 outside. City lattice
coordinates are printed as TOML so they can be pasted into scenario.toml.

Usage: make_italy_fixture.py OUT.pgm [--scale PX_PER_DEG]
"""
import math
import sys

LON0, LON1 = 6.4, 18.7
LAT0, LAT1 = 37.7, 47.2
COS_LAT = math.cos(math.radians((LAT0 + LAT1) / 2.0))

# Mainland coastline and Alpine border, clockwise from Ventimiglia.
OUTLINE = [
    (7.53, 43.78), (8.00, 43.88), (8.45, 44.30), (8.93, 44.40), (9.45, 44.22),
    (9.82, 44.07), (10.20, 43.90), (10.30, 43.55), (10.50, 42.95), (11.10, 42.40),
    (11.80, 42.03), (12.25, 41.73), (12.60, 41.45), (13.05, 41.23), (13.60, 41.25),
    (14.05, 40.80), (14.30, 40.63), (14.80, 40.62), (15.00, 40.30), (15.30, 40.03),
    (15.65, 40.00), (15.80, 39.60), (16.05, 39.10), (16.20, 38.95), (15.90, 38.65),
    (15.85, 38.45), (15.62, 38.25), (15.62, 37.95), (16.05, 37.92), (16.55, 38.40),
    (16.60, 38.80), (17.15, 39.05), (17.10, 39.40), (16.60, 39.75), (16.85, 40.38),
    (17.25, 40.45), (17.90, 40.25), (18.00, 40.05), (18.37, 39.80), (18.52, 40.15),
    (18.05, 40.65), (17.30, 40.95), (16.87, 41.13), (16.20, 41.40), (15.90, 41.60),
    (16.15, 41.90), (15.60, 41.93), (15.10, 41.95), (14.70, 42.10), (14.20, 42.45),
    (13.85, 42.90), (13.60, 43.55), (13.00, 43.85), (12.62, 44.05), (12.30, 44.45),
    (12.50, 44.95), (12.25, 45.30), (12.60, 45.50), (13.10, 45.65), (13.60, 45.75),
    (13.75, 45.60), (13.90, 45.65), (13.60, 46.10), (13.70, 46.50), (12.70, 46.65),
    (12.20, 47.00), (11.50, 47.00), (10.50, 46.85), (10.10, 46.40), (9.30, 46.50),
    (8.90, 45.95), (8.40, 46.45), (7.90, 45.95), (7.00, 45.90), (6.80, 45.70),
    (7.10, 45.20), (6.65, 44.90), (6.95, 44.40), (7.70, 44.15),
]

# Apennine blocks, kept as separate patches so the peninsula stays connected.
MOUNTAINS = [
    [(9.55, 44.42), (10.30, 44.22), (10.95, 44.10), (10.85, 43.98), (10.20, 44.08), (9.50, 44.30)],
    [(11.95, 43.55), (12.55, 43.35), (13.05, 42.90), (12.92, 42.75), (12.45, 43.15), (11.85, 43.42)],
    [(13.20, 42.50), (13.85, 42.20), (14.25, 41.82), (14.05, 41.72), (13.55, 42.08), (13.10, 42.35)],
    [(15.15, 40.62), (15.55, 40.42), (15.95, 40.18), (15.85, 40.05), (15.45, 40.30), (15.05, 40.52)],
    [(16.25, 39.45), (16.70, 39.30), (16.62, 39.10), (16.22, 39.22)],
]

# Ancient sites; a few coastal ones are nudged inland so the centre cell is land.
# Ariminum sits slightly south-west of modern Rimini so that Florenzia is its
# nearest neighbour (the spanning tree then routes Florenzia-Ariminum).
CITIES = [
    ("Genua", 8.95, 44.47),
    ("Placentia", 9.69, 45.05),
    ("Aquileia", 13.37, 45.82),
    ("Bononia", 11.34, 44.49),
    ("Florenzia", 11.25, 43.77),
    ("Ariminum", 12.45, 43.98),
    ("Roma", 12.50, 41.90),
    ("Capua", 14.25, 41.08),
    ("Venusia", 15.82, 40.96),
    ("Brundisium", 17.90, 40.58),
    ("Rhegium", 15.72, 38.15),
]


def project(lon, lat, scale):
    x = (lon - LON0) * COS_LAT * scale
    y = (LAT1 - lat) * scale
    return x, y


def inside(px, py, poly):
    hit = False
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (y1 > py) != (y2 > py):
            xc = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            if px < xc:
                hit = not hit
    return hit


def rasterize(scale):
    w = int(math.ceil((LON1 - LON0) * COS_LAT * scale))
    h = int(math.ceil((LAT1 - LAT0) * scale))
    land = [project(lo, la, scale) for lo, la in OUTLINE]
    hills = [[project(lo, la, scale) for lo, la in m] for m in MOUNTAINS]
    px = bytearray(w * h)
    for y in range(h):
        for x in range(w):
            cx, cy = x + 0.0, y + 0.0
            v = 0
            if inside(cx, cy, land):
                v = 255
                if any(inside(cx, cy, m) for m in hills):
                    v = 128
            px[y * w + x] = v
    return w, h, px


def main():
    out = sys.argv[1]
    scale = float(sys.argv[3]) if len(sys.argv) > 3 and sys.argv[2] == "--scale" else 37.8
    w, h, px = rasterize(scale)
    with open(out, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(bytes(px))
    counts = {v: px.count(v) for v in (0, 128, 255)}
    print(f"# {w}x{h} habitable={counts[255]} obstacle={counts[128]} outside={counts[0]}")
    for name, lon, lat in CITIES:
        x, y = project(lon, lat, scale)
        xi, yi = int(round(x)), int(round(y))
        cls = px[yi * w + xi]
        print(f'{{ name = "{name}", x = {xi}, y = {yi} }},  # grey {cls}')


if __name__ == "__main__":
    main()
