"""
Lectura de archivos .metric (formato por secciones, estilo INI).

    # comentario
    [coordinates]        x1, x2, y1, y2
    [functions]          H(y1, y2)            o  H(y1, y2) = y1^4   (realización numérica)
    [metric]             g[x1,y1] = 1         índices por nombre o 1..n
    [frame]              p = 1 | n = 4 | gframe[1,4] = 1 | E[4,y1] = -1/2*H(y1,y2) | r[3;1,2] = 1
    [algebra]            p = 1 | q = 3 | k[2,3] = e1 | act[4,2] = e2 | hb[4,4] = 0
                         gnull[1,1] = 1 | gmiddle[1,1] = 1
    [ambient]            truncation = 3 | h[y1,y1;1] = -12*x1^2 | h[u,u;2;log] = -3
    [options]            name = sig22 | rank = 2 | lambda = -2
    [expected]           ricci[y1,y1] = -12*x1^2 | scalar = 0

Exactamente uno de [metric], [frame] o [algebra]. Las entradas omitidas valen 0 y
las simétricas se completan. Todo error lleva el número de línea.
"""
import logging
import re
from pathlib import Path

import sympy

from core.errors import InputError, MetricFileError
from expr.parser import parse
from expr.services import RHO, normal
from frame.models import FrameData, SemidirectAlgebra
from frame.semidirect import build_semidirect
from tensor.models import Metric

from cli.models import MetricDocument

logger = logging.getLogger(__name__)

SECTIONS = ("coordinates", "functions", "metric", "frame", "algebra", "ambient", "options", "expected")
HEADER_RE = re.compile(r"^\[(?P<name>[A-Za-z_]+)\]$")
ENTRY_RE = re.compile(r"^(?P<key>[A-Za-z][A-Za-z0-9_]*)\s*(?:\[(?P<index>[^\]]*)\])?\s*=\s*(?P<value>.*)$")
FUNCTION_RE = re.compile(r"^(?P<name>[A-Za-z][A-Za-z0-9]*)\s*\((?P<args>[^)]*)\)\s*(?:=\s*(?P<value>.*))?$")
NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9]*$")
RESERVED = {"rho", "log", "D", "t"}


def _sections(text: str):
    """{sección: [(línea, contenido)]} sin comentarios ni líneas vacías."""
    sections = {}
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = HEADER_RE.match(line)
        if match:
            current = match.group("name").lower()
            if current not in SECTIONS:
                raise MetricFileError(f"Sección desconocida [{current}]", number)
            if current in sections:
                raise MetricFileError(f"Sección [{current}] repetida", number)
            sections[current] = []
            continue
        if current is None:
            raise MetricFileError("Contenido fuera de una sección", number)
        sections[current].append((number, line))
    return sections


def _entry(number, line):
    match = ENTRY_RE.match(line)
    if not match:
        raise MetricFileError(f"Entrada mal formada: {line!r}", number)
    index = match.group("index")
    parts = None
    if index is not None:
        parts = [[token.strip() for token in group.split(",")] for group in index.split(";")]
    value = match.group("value").strip()
    if not value:
        raise MetricFileError(f"Falta el valor de {match.group('key')}", number)
    return match.group("key"), parts, value


class _Reader:
    def __init__(self, text, source):
        self.text = text
        self.source = source
        self.sections = _sections(text)
        self.coords = ()
        self.functions = {}
        self.bindings = {}
        self._explicit = {}

    # -- utilidades ---------------------------------------------------------
    def expression(self, number, value, variables=None, fraction=True):
        variables = self.coords if variables is None else variables
        try:
            e = parse(value, variables=variables, functions=self.functions, fraction=fraction)
        except InputError as exc:
            raise MetricFileError(str(exc), number) from exc
        return e

    def rational(self, number, value):
        try:
            return sympy.Rational(value)
        except (TypeError, ValueError) as exc:
            raise MetricFileError(f"Se esperaba un racional: {value!r}", number) from exc

    def integer(self, number, value):
        try:
            return int(value)
        except ValueError as exc:
            raise MetricFileError(f"Se esperaba un entero: {value!r}", number) from exc

    def index(self, number, token, n, names=True):
        if token.isdigit():
            position = int(token) - 1
        elif names and token in self.coords:
            position = self.coords.index(token)
        else:
            raise MetricFileError(f"Índice desconocido {token!r}", number)
        if not 0 <= position < n:
            raise MetricFileError(f"Índice fuera de rango {token!r} (n = {n})", number)
        return position

    def pair(self, number, parts, n, names=True):
        if not parts or len(parts[0]) != 2:
            raise MetricFileError("Se esperaban dos índices [i,j]", number)
        return tuple(self.index(number, token, n, names) for token in parts[0])

    # -- secciones ----------------------------------------------------------
    def read_coordinates(self):
        names = []
        for number, line in self.sections.get("coordinates", []):
            for name in re.split(r"[,\s]+", line):
                if not name:
                    continue
                if not NAME_RE.match(name) or name in RESERVED:
                    raise MetricFileError(f"Nombre de coordenada inválido {name!r}", number)
                if name in names:
                    raise MetricFileError(f"Coordenada repetida {name!r}", number)
                names.append(name)
        self.coords = tuple(names)

    def read_functions(self):
        for number, line in self.sections.get("functions", []):
            match = FUNCTION_RE.match(line)
            if not match:
                raise MetricFileError(f"Declaración de función mal formada: {line!r}", number)
            name = match.group("name")
            args = tuple(a.strip() for a in match.group("args").split(",") if a.strip())
            if name in self.functions:
                raise MetricFileError(f"Función repetida {name!r}", number)
            missing = [a for a in args if a not in self.coords]
            if missing:
                raise MetricFileError(f"Argumento no declarado {missing[0]!r} en {name}", number)
            self.functions[name] = args
            if match.group("value"):
                self.expression(number, match.group("value"), variables=args)
                self.bindings[name] = match.group("value").strip()

    def symmetric(self, section, key_name, n, names=True):
        """Entradas key[i,j] = expr completadas por simetría."""
        values = {}
        for number, line in self.sections.get(section, []):
            key, parts, value = _entry(number, line)
            if key != key_name:
                raise MetricFileError(f"Se esperaba {key_name}[i,j] en [{section}]", number)
            i, j = self.pair(number, parts, n, names)
            e = self.expression(number, value)
            self._store(values, (i, j), e, number)
        return values

    def _store(self, values, key, e, number):
        i, j = key
        mirror = (j, i)
        explicit = self._explicit.setdefault(id(values), set())
        if key in explicit:
            raise MetricFileError(f"Entrada repetida ({i + 1}, {j + 1})", number)
        explicit.add(key)
        if mirror in explicit and normal(values[mirror] - e) != 0:
            raise MetricFileError(f"Entrada no simétrica en ({i + 1}, {j + 1})", number)
        values[key] = e
        values[mirror] = e

    def read_metric(self):
        n = len(self.coords)
        if n == 0:
            raise MetricFileError("La sección [metric] requiere [coordinates]")
        values = self.symmetric("metric", "g", n)
        rows = [[values.get((i, j), sympy.Integer(0)) for j in range(n)] for i in range(n)]
        det = normal(sympy.Matrix(rows).det(method="berkowitz"))
        if det == 0:
            line = self.sections["metric"][0][0] if self.sections["metric"] else None
            raise MetricFileError("La métrica es degenerada (det = 0)", line)
        return Metric.from_matrix(self.coords, rows, functions=self.functions, name=self.name)

    def read_frame(self):
        settings = {}
        gframe, fields, structure = {}, {}, {}
        entries = []
        for number, line in self.sections["frame"]:
            key, parts, value = _entry(number, line)
            if parts is None:
                settings[key] = (number, value)
            else:
                entries.append((number, key, parts, value))

        n = len(self.coords)
        if "n" in settings:
            n = self.integer(*settings["n"])
        if n == 0:
            raise MetricFileError("El marco requiere [coordinates] o n = ...", self.sections["frame"][0][0])
        if "p" not in settings:
            raise MetricFileError("Falta p = ... en [frame]", self.sections["frame"][0][0])
        p = self.integer(*settings["p"])

        for number, key, parts, value in entries:
            if key == "gframe":
                self._store(gframe, self.pair(number, parts, n, names=False), self.rational(number, value), number)
            elif key == "E":
                if not self.coords:
                    raise MetricFileError("E[i,mu] requiere [coordinates]", number)
                i = self.index(number, parts[0][0], n, names=False)
                mu = self.index(number, parts[0][1], len(self.coords))
                fields[(i, mu)] = self.expression(number, value)
            elif key == "r":
                if len(parts) != 2 or len(parts[0]) != 1:
                    raise MetricFileError("Se esperaba r[k;i,j]", number)
                k = self.index(number, parts[0][0], n, names=False)
                i, j = self.pair(number, parts[1:], n, names=False)
                e = self.expression(number, value)
                structure[(k, i, j)] = e
                structure.setdefault((k, j, i), normal(-e))
            else:
                raise MetricFileError(f"Clave desconocida {key!r} en [frame]", number)

        G = [[gframe.get((i, j), sympy.Integer(0)) for j in range(n)] for i in range(n)]
        try:
            if fields:
                if structure:
                    raise MetricFileError("Use E[i,mu] o r[k;i,j], no ambos", entries[0][0])
                rows = [[fields.get((i, mu), sympy.Integer(0)) for mu in range(len(self.coords))] for i in range(n)]
                return FrameData.from_vector_fields(self.coords, rows, G, p, functions=self.functions, name=self.name)
            r = [[[structure.get((k, i, j), 0) for j in range(n)] for i in range(n)] for k in range(n)]
            return FrameData.from_structure(G, r, p, name=self.name)
        except InputError as exc:
            if isinstance(exc, MetricFileError):
                raise
            raise MetricFileError(str(exc), self.sections["frame"][0][0]) from exc

    def _combination(self, number, value, n):
        """'2*e1 - e3' -> {0: 2, 2: -1}."""
        names = [f"e{k + 1}" for k in range(n)]
        e = self.expression(number, value, variables=names, fraction=False)
        symbols = [sympy.Symbol(name) for name in names]
        result = {}
        for k, s in enumerate(symbols):
            c = sympy.expand(e).coeff(s, 1)
            if c != 0:
                if not c.is_Rational:
                    raise MetricFileError(f"Coeficiente no racional en {value!r}", number)
                result[k] = c
        rest = normal(e - sum(c * symbols[k] for k, c in result.items()))
        if rest != 0:
            raise MetricFileError(f"Se esperaba una combinación lineal de e_k: {value!r}", number)
        return result

    def read_algebra(self):
        settings, entries = {}, []
        for number, line in self.sections["algebra"]:
            key, parts, value = _entry(number, line)
            if parts is None:
                settings[key] = (number, value)
            else:
                entries.append((number, key, parts, value))
        first = self.sections["algebra"][0][0] if self.sections["algebra"] else None
        for key in ("p", "q"):
            if key not in settings:
                raise MetricFileError(f"Falta {key} = ... en [algebra]", first)
        p, q = self.integer(*settings["p"]), self.integer(*settings["q"])
        n = p + q
        brackets = {"k": {}, "act": {}, "hb": {}}
        g_null, g_middle = {}, {}
        for number, key, parts, value in entries:
            if key in brackets:
                i, j = self.pair(number, parts, n, names=False)
                brackets[key][(i, j)] = self._combination(number, value, n)
            elif key == "gnull":
                self._store(g_null, self.pair(number, parts, p, names=False), self.rational(number, value), number)
            elif key == "gmiddle":
                pair = self.pair(number, parts, q - p, names=False)
                self._store(g_middle, pair, self.rational(number, value), number)
            else:
                raise MetricFileError(f"Clave desconocida {key!r} en [algebra]", number)
        S = SemidirectAlgebra(
            p=p,
            q=q,
            k_brackets=brackets["k"],
            action=brackets["act"],
            h_brackets=brackets["hb"],
            g_null_dual=tuple(tuple(g_null.get((a, c), 0) for c in range(p)) for a in range(p)),
            g_middle=tuple(tuple(g_middle.get((A, B), 0) for B in range(q - p)) for A in range(q - p)),
            name=self.name,
        )
        try:
            return S, build_semidirect(S)
        except InputError as exc:
            raise MetricFileError(str(exc), first) from exc

    def read_ambient(self, n):
        terms, truncation = {}, None
        for number, line in self.sections.get("ambient", []):
            key, parts, value = _entry(number, line)
            if key == "truncation" and parts is None:
                truncation = self.rational(number, value)
                continue
            if key != "h" or parts is None or len(parts) not in (2, 3):
                raise MetricFileError("Se esperaba h[i,j;orden] o h[i,j;orden;log]", number)
            i, j = self.pair(number, parts, n)
            order = self.rational(number, parts[1][0])
            log_power = 0
            if len(parts) == 3:
                match = re.fullmatch(r"log(?:\^(\d+))?", parts[2][0])
                if not match:
                    raise MetricFileError(f"Marca logarítmica inválida {parts[2][0]!r}", number)
                log_power = int(match.group(1) or 1)
            if order <= 0:
                raise MetricFileError(f"h no se anula en rho = 0 (orden {order})", number)
            e = self.expression(number, value)
            if e.has(RHO):
                raise MetricFileError("Los coeficientes de h no dependen de rho", number)
            key = (min(i, j), max(i, j))
            bucket = terms.setdefault(key, {})
            if (order, log_power) in bucket:
                raise MetricFileError(f"Término repetido h[{i + 1},{j + 1};{order}]", number)
            bucket[(order, log_power)] = e
        return terms, truncation

    def read_options(self):
        options = {}
        for number, line in self.sections.get("options", []):
            key, parts, value = _entry(number, line)
            if parts is not None:
                raise MetricFileError(f"Opción con índices: {key}", number)
            options[key] = value
        return options

    def read_expected(self, n):
        expected = {}
        for number, line in self.sections.get("expected", []):
            key, parts, value = _entry(number, line)
            e = self.expression(number, value)
            if parts is None:
                expected[key] = e
            else:
                i, j = self.pair(number, parts, n)
                expected.setdefault(key, {})
                self._store(expected[key], (i, j), e, number)
        return expected

    # ------------------------------------------------------------------
    def read(self) -> MetricDocument:
        self.name = ""
        options = self.read_options()
        self.name = options.get("name") or Path(self.source).stem
        self.read_coordinates()
        self.read_functions()

        blocks = [name for name in ("metric", "frame", "algebra") if name in self.sections]
        if len(blocks) != 1:
            raise MetricFileError(f"Se requiere exactamente una de [metric], [frame], [algebra] ({blocks})")
        frame = algebra = None
        if blocks[0] == "metric":
            metric = self.read_metric()
        elif blocks[0] == "frame":
            frame = self.read_frame()
            metric = frame.metric
        else:
            algebra, frame = self.read_algebra()
            metric = frame.metric
        terms, truncation = self.read_ambient(metric.n)
        document = MetricDocument(
            source=self.source,
            text=self.text,
            coords=self.coords,
            metric=metric,
            functions=dict(self.functions),
            bindings=dict(self.bindings),
            frame=frame,
            algebra=algebra,
            h_terms=terms,
            truncation=truncation,
            options=options,
            expected=self.read_expected(metric.n),
        )
        logger.debug("Archivo %s leído: n=%s, secciones=%s", self.source, metric.n, sorted(self.sections))
        return document


def parse_metric_file(text: str, source: str = "<texto>") -> MetricDocument:
    return _Reader(text, source).read()


def load_metric_file(path) -> MetricDocument:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MetricFileError(f"No se puede leer {path}: {exc.strerror or exc}") from exc
    return parse_metric_file(text, str(path))


def load_ambient_terms(path, document: MetricDocument) -> dict:
    """Archivo con solo [ambient], leído con las coordenadas y funciones de `document`."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MetricFileError(f"No se puede leer {path}: {exc.strerror or exc}") from exc
    reader = _Reader(text, str(path))
    extra = sorted(set(reader.sections) - {"ambient"})
    if extra:
        raise MetricFileError(f"Solo se admite la sección [ambient] (aparece {extra})")
    reader.coords = document.coords
    reader.functions = dict(document.functions)
    terms, _ = reader.read_ambient(document.n)
    return terms
