from fractions import Fraction

from predim.universe import ClassId, Point, Universe


def ej(points, epairs=(), cls=ClassId.EJ_TOY, name="U"):
    """points: (id, vector, hecke, sl2) tuples; missing labels may be omitted."""
    pts = []
    for p in points:
        pid, vec, *labels = p
        hecke = labels[0] if labels else None
        sl2 = labels[1] if len(labels) > 1 else None
        pts.append(Point(pid, tuple(Fraction(x) for x in vec), hecke=hecke, sl2=sl2))
    return Universe(cls, pts, epairs, name=name)


def exp(points, epairs=(), name="E"):
    """points: (id, td vector, lin vector or None)."""
    pts = [Point(pid, tuple(map(Fraction, td)), None if lin is None else tuple(map(Fraction, lin)))
           for pid, td, lin in points]
    return Universe(ClassId.EXP_TOY, pts, epairs, name=name)
