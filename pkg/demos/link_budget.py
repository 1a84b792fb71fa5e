"""
Inter-satellite link budget
===========================

How fast can a LEO hand intermediate features to the HEO? Free-space path
loss sets the received power and the Shannon formula turns it into a rate.
"""

import numpy as np

from orbit_sim import LinkParams, link_rate, received_power, transfer_time

# the default Ka-band link: 1 GHz bandwidth, 10 W, 30 dBi antennas, 40 000 km
link = LinkParams()
print(f"received power  {received_power(link):.3e} W")
print(f"link rate       {link_rate(link) / 1e3:.1f} kbit/s")

# one 32x32x3 image is 24576 bits; propagation alone costs Q/c
for images in (1, 5, 10):
    bits = images * 24576
    print(f"{images:2d} image(s): {transfer_time(link, bits):6.3f} s on the wire")

# the rate falls off with distance: path loss grows with Q squared
for km in np.geomspace(5e3, 8e4, 5):
    far = LinkParams(distance_m=km * 1e3)
    print(f"Q = {km:8.0f} km  ->  {link_rate(far) / 1e3:8.1f} kbit/s")
