from .base import DomainFamily, FamilySample, disk_mesh
from .disk_cosine import DiskCosine
from .disk_dilation import DiskDilation
from .disk_translation import DiskTranslation
from .rect_width import RectWidth
from .square_shear import SquareShear

FAMILIES = {
    "rect-width": RectWidth,
    "disk-dilation": DiskDilation,
    "disk-translation": DiskTranslation,
    "disk-cosine": DiskCosine,
    "square-shear": SquareShear,
}
