# services/logic.py
"""
計數邏輯服務
職責：C^(k1,k2) 公式的解析、格式化、結構分析（free / bound / qr / requantified）、
      在 ColoredGraph 上求值，以及產生測試用的隨機公式

語法（ASCII）:
    E(z,w)   z=w   U_<name>(z)   !φ   φ & ψ   φ | ψ   φ -> ψ
    exists>=k z φ   exists z φ   forall z φ   ( φ )
優先順序由高到低：! 與量詞（量詞主體為單元式）、&（左結合）、|（左結合）、->（右結合）
"""
import random
import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Set, Tuple, Union

from services.errors import ConfigurationError, FormulaError
from services.graphs import ColoredGraph, PartialAssignment, variable_names

# ==================== AST ====================


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Edge:
    left: str
    right: str


@dataclass(frozen=True)
class HasColor:
    color: int
    var: str


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class CountExists:
    threshold: int
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Eq, Edge, HasColor, Not, And, Or, Implies, CountExists, Forall, Exists]
ATOMS = (Eq, Edge, HasColor)
BINARY = (And, Or, Implies)
QUANTIFIERS = (CountExists, Forall, Exists)


def normalize(phi: Formula) -> Formula:
    """展開語法糖：∀z φ → ¬∃^{≥1} z ¬φ，∃z φ → ∃^{≥1} z φ"""
    if isinstance(phi, ATOMS):
        return phi
    if isinstance(phi, Not):
        return Not(normalize(phi.body))
    if isinstance(phi, BINARY):
        return type(phi)(normalize(phi.left), normalize(phi.right))
    if isinstance(phi, Forall):
        return Not(CountExists(1, phi.var, Not(normalize(phi.body))))
    if isinstance(phi, Exists):
        return CountExists(1, phi.var, normalize(phi.body))
    return CountExists(phi.threshold, phi.var, normalize(phi.body))


# ==================== 結構分析 ====================

def free_variables(phi: Formula) -> FrozenSet[str]:
    if isinstance(phi, (Eq, Edge)):
        return frozenset((phi.left, phi.right))
    if isinstance(phi, HasColor):
        return frozenset((phi.var,))
    if isinstance(phi, Not):
        return free_variables(phi.body)
    if isinstance(phi, BINARY):
        return free_variables(phi.left) | free_variables(phi.right)
    return free_variables(phi.body) - {phi.var}


def bound_variables(phi: Formula) -> FrozenSet[str]:
    if isinstance(phi, ATOMS):
        return frozenset()
    if isinstance(phi, Not):
        return bound_variables(phi.body)
    if isinstance(phi, BINARY):
        return bound_variables(phi.left) | bound_variables(phi.right)
    return bound_variables(phi.body) | {phi.var}


def quantifier_rank(phi: Formula) -> int:
    if isinstance(phi, ATOMS):
        return 0
    if isinstance(phi, Not):
        return quantifier_rank(phi.body)
    if isinstance(phi, BINARY):
        return max(quantifier_rank(phi.left), quantifier_rank(phi.right))
    return 1 + quantifier_rank(phi.body)


def _nested_requantified(phi: Formula, enclosing: FrozenSet[str] = frozenset()) -> Set[str]:
    """在自己量詞範圍內又被量化的變數"""
    if isinstance(phi, ATOMS):
        return set()
    if isinstance(phi, Not):
        return _nested_requantified(phi.body, enclosing)
    if isinstance(phi, BINARY):
        return _nested_requantified(phi.left, enclosing) | _nested_requantified(phi.right, enclosing)
    found = {phi.var} if phi.var in enclosing else set()
    return found | _nested_requantified(phi.body, enclosing | {phi.var})


def variables_of(phi: Formula) -> FrozenSet[str]:
    return free_variables(phi) | bound_variables(phi) | _all_atom_variables(phi)


def _all_atom_variables(phi: Formula) -> FrozenSet[str]:
    if isinstance(phi, (Eq, Edge)):
        return frozenset((phi.left, phi.right))
    if isinstance(phi, HasColor):
        return frozenset((phi.var,))
    if isinstance(phi, Not):
        return _all_atom_variables(phi.body)
    if isinstance(phi, BINARY):
        return _all_atom_variables(phi.left) | _all_atom_variables(phi.right)
    return _all_atom_variables(phi.body)


_VARIABLE = re.compile(r"^([xy])([1-9]\d*)$")


def _split_variable(name: str) -> Tuple[str, int]:
    match = _VARIABLE.match(name)
    if not match:
        raise FormulaError(f"unknown variable {name!r}")
    return match.group(1), int(match.group(2))


@dataclass
class FormulaReport:
    """公式的結構資訊與對 C^(k1,k2) / C^(k1,k2)_r 的歸屬判定"""
    free: FrozenSet[str]
    bound: FrozenSet[str]
    qr: int
    requantified: FrozenSet[str]
    variables: FrozenSet[str]
    k1: int
    k2: int
    r: Optional[int] = None

    def in_fragment(self, k1: Optional[int] = None, k2: Optional[int] = None, r: Optional[int] = None) -> bool:
        """φ ∈ C^(k1,k2)_r：變數都在 [x_k1, y_k2] 內、y 都未被 requantify、qr ≤ r"""
        k1 = self.k1 if k1 is None else k1
        k2 = self.k2 if k2 is None else k2
        for name in self.variables:
            kind, index = _split_variable(name)
            if index > (k1 if kind == "x" else k2):
                return False
        if any(name.startswith("y") for name in self.requantified):
            return False
        return r is None or self.qr <= r

    @property
    def in_logic(self) -> bool:
        return self.in_fragment()

    @property
    def in_rank(self) -> Optional[bool]:
        return None if self.r is None else self.in_fragment(r=self.r)

    @property
    def rank_bound_violated(self) -> bool:
        """C^(0,k2) 的句子 qr 不會超過 k2"""
        return self.k1 == 0 and self.in_logic and not self.free and self.qr > self.k2

    def to_dict(self) -> Dict:
        return {
            "free": sorted(self.free),
            "bound": sorted(self.bound),
            "qr": self.qr,
            "requantified": sorted(self.requantified),
            "k1": self.k1,
            "k2": self.k2,
            "in_logic": self.in_logic,
            "r": self.r,
            "in_rank": self.in_rank,
            "rank_bound_violated": self.rank_bound_violated,
        }


def analyze(phi: Formula, k1: Optional[int] = None, k2: Optional[int] = None, r: Optional[int] = None) -> FormulaReport:
    """
    分析公式

    Args:
        phi: 公式
        k1, k2: 變數預算；省略時取公式中出現的最大索引
        r: 量詞深度上限（可選）
    """
    free = free_variables(phi)
    bound = bound_variables(phi)
    variables = variables_of(phi)
    max_index = {"x": 0, "y": 0}
    for name in variables:
        kind, index = _split_variable(name)
        max_index[kind] = max(max_index[kind], index)
    return FormulaReport(
        free=free,
        bound=bound,
        qr=quantifier_rank(phi),
        requantified=frozenset((free & bound) | _nested_requantified(phi)),
        variables=variables,
        k1=max_index["x"] if k1 is None else k1,
        k2=max_index["y"] if k2 is None else k2,
        r=r,
    )


# ==================== 解析 ====================

_TOKEN_SPEC = [
    ("WS", r"\s+"),
    ("ARROW", r"->"),
    ("GEQ", r">="),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("COMMA", r","),
    ("EQ", r"="),
    ("AND", r"&"),
    ("OR", r"\|"),
    ("NOT", r"!"),
    ("COLOR", r"U_\w+"),
    ("INT", r"\d+"),
    ("WORD", r"[A-Za-z_]\w*"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    position = 0
    while position < len(text):
        match = _TOKEN_RE.match(text, position)
        if not match:
            raise FormulaError(f"unexpected character {text[position]!r}", position)
        if match.lastgroup != "WS":
            tokens.append(Token(match.lastgroup, match.group(), position))
        position = match.end()
    tokens.append(Token("END", "", len(text)))
    return tokens


def parse_legend(text: Optional[str]) -> Dict[str, int]:
    """
    "red=0,blue=1"（或 "0=red,1=blue"）-> {"red": 0, "blue": 1}
    """
    legend: Dict[str, int] = {}
    if not text:
        return legend
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise FormulaError(f"legend entry {item!r} is not of the form name=color")
        left, right = (part.strip() for part in item.split("=", 1))
        if left.isdigit() and not right.isdigit():
            left, right = right, left
        if not right.isdigit() or not re.match(r"^\w+$", left):
            raise FormulaError(f"legend entry {item!r} is not of the form name=color")
        legend[left] = int(right)
    return legend


class _Parser:
    """遞迴下降 parser"""

    def __init__(self, text: str, k1: int, k2: int, legend: Mapping[str, int]):
        self.tokens = tokenize(text)
        self.index = 0
        self.names = set(variable_names(k1, k2))
        self.legend = legend

    def peek(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, kind: str) -> Token:
        token = self.peek()
        if token.kind != kind:
            found = token.text or "end of input"
            raise FormulaError(f"expected {kind}, found {found!r}", token.position)
        return self.advance()

    def variable(self) -> str:
        token = self.expect("WORD")
        if token.text not in self.names:
            raise FormulaError(f"unknown variable {token.text!r}", token.position)
        return token.text

    def parse(self) -> Formula:
        phi = self.implication()
        token = self.peek()
        if token.kind != "END":
            raise FormulaError(f"unexpected {token.text!r}", token.position)
        return phi

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek().kind == "ARROW":
            self.advance()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        phi = self.conjunction()
        while self.peek().kind == "OR":
            self.advance()
            phi = Or(phi, self.conjunction())
        return phi

    def conjunction(self) -> Formula:
        phi = self.unary()
        while self.peek().kind == "AND":
            self.advance()
            phi = And(phi, self.unary())
        return phi

    def unary(self) -> Formula:
        token = self.peek()
        if token.kind == "NOT":
            self.advance()
            return Not(self.unary())
        if token.kind == "LPAREN":
            self.advance()
            phi = self.implication()
            self.expect("RPAREN")
            return phi
        if token.kind == "WORD" and token.text in ("exists", "forall"):
            return self.quantifier()
        if token.kind == "WORD" and token.text == "E" and self.tokens[self.index + 1].kind == "LPAREN":
            self.advance()
            self.expect("LPAREN")
            left = self.variable()
            self.expect("COMMA")
            right = self.variable()
            self.expect("RPAREN")
            return Edge(left, right)
        if token.kind == "COLOR":
            self.advance()
            color = self.color(token)
            self.expect("LPAREN")
            var = self.variable()
            self.expect("RPAREN")
            return HasColor(color, var)
        if token.kind == "WORD":
            left = self.variable()
            self.expect("EQ")
            return Eq(left, self.variable())
        found = token.text or "end of input"
        raise FormulaError(f"unexpected {found!r}", token.position)

    def quantifier(self) -> Formula:
        keyword = self.advance()
        if keyword.text == "exists" and self.peek().kind == "GEQ":
            self.advance()
            threshold = self.peek()
            if threshold.kind != "INT":
                raise FormulaError("threshold must be a non-negative integer", threshold.position)
            self.advance()
            var = self.variable()
            return CountExists(int(threshold.text), var, self.unary())
        var = self.variable()
        body = self.unary()
        return Exists(var, body) if keyword.text == "exists" else Forall(var, body)

    def color(self, token: Token) -> int:
        name = token.text[2:]
        if name in self.legend:
            return self.legend[name]
        if name.isdigit():
            return int(name)
        raise FormulaError(f"unknown color name {name!r}", token.position)


def infer_budget(text: str) -> Tuple[int, int]:
    """文字中出現的最大 x / y 索引"""
    top = {"x": 0, "y": 0}
    for token in tokenize(text):
        match = _VARIABLE.match(token.text) if token.kind == "WORD" else None
        if match:
            top[match.group(1)] = max(top[match.group(1)], int(match.group(2)))
    return top["x"], top["y"]


def parse_formula(
    text: str,
    k1: Optional[int],
    k2: Optional[int],
    legend: Optional[Mapping[str, int]] = None,
) -> Formula:
    """
    解析公式文字

    Args:
        text: 公式
        k1, k2: 允許的變數 x1..x{k1}, y1..y{k2}；None 時取文字中出現的最大索引
        legend: 顏色名稱 -> ColorId；沒有時以 U_<整數> 指定顏色

    Raises:
        FormulaError: 語法錯誤（含位置）、未知變數、門檻不是非負整數
    """
    if k1 is None or k2 is None:
        seen_x, seen_y = infer_budget(text)
        k1 = seen_x if k1 is None else k1
        k2 = seen_y if k2 is None else k2
    if k1 < 0 or k2 < 0:
        raise ConfigurationError("k1 and k2 must be non-negative")
    return _Parser(text, k1, k2, legend or {}).parse()


def format_formula(phi: Formula, legend: Optional[Mapping[str, int]] = None) -> str:
    """公式 -> 文字；parse_formula(format_formula(φ)) 與 φ 結構相同"""
    names = {color: name for name, color in (legend or {}).items()}

    def wrap(child: Formula) -> str:
        text = render(child)
        return f"({text})" if isinstance(child, BINARY) else text

    def render(node: Formula) -> str:
        if isinstance(node, Eq):
            return f"{node.left}={node.right}"
        if isinstance(node, Edge):
            return f"E({node.left},{node.right})"
        if isinstance(node, HasColor):
            return f"U_{names.get(node.color, node.color)}({node.var})"
        if isinstance(node, Not):
            return f"!{wrap(node.body)}"
        if isinstance(node, And):
            return f"{wrap(node.left)} & {wrap(node.right)}"
        if isinstance(node, Or):
            return f"{wrap(node.left)} | {wrap(node.right)}"
        if isinstance(node, Implies):
            return f"{wrap(node.left)} -> {wrap(node.right)}"
        if isinstance(node, CountExists):
            return f"exists>={node.threshold} {node.var} {wrap(node.body)}"
        keyword = "forall" if isinstance(node, Forall) else "exists"
        return f"{keyword} {node.var} {wrap(node.body)}"

    return render(phi)


# ==================== 求值 ====================

def evaluate(G: ColoredGraph, alpha: PartialAssignment, phi: Formula) -> bool:
    """
    在 (G, α) 上求值

    Raises:
        FormulaError: 自由變數未被 α 賦值，或變數不在 α 的變數集合內
    """
    alpha.validate_for(G)
    known = set(variable_names(alpha.k1, alpha.k2))
    unknown = sorted(variables_of(phi) - known)
    if unknown:
        raise FormulaError(f"variables {unknown} are not in [x{alpha.k1}, y{alpha.k2}]")
    env = alpha.as_mapping()
    missing = sorted(free_variables(phi) - set(env))
    if missing:
        raise FormulaError(f"free variables {missing} are not assigned")
    return _holds(G, env, phi)


def _holds(G: ColoredGraph, env: Dict[str, int], phi: Formula) -> bool:
    if isinstance(phi, Eq):
        return env[phi.left] == env[phi.right]
    if isinstance(phi, Edge):
        return G.has_edge(env[phi.left], env[phi.right])
    if isinstance(phi, HasColor):
        return G.colors[env[phi.var]] == phi.color
    if isinstance(phi, Not):
        return not _holds(G, env, phi.body)
    if isinstance(phi, And):
        return _holds(G, env, phi.left) and _holds(G, env, phi.right)
    if isinstance(phi, Or):
        return _holds(G, env, phi.left) or _holds(G, env, phi.right)
    if isinstance(phi, Implies):
        return not _holds(G, env, phi.left) or _holds(G, env, phi.right)
    if isinstance(phi, Forall):
        return all(_holds(G, {**env, phi.var: v}, phi.body) for v in range(G.n))
    if isinstance(phi, Exists):
        return any(_holds(G, {**env, phi.var: v}, phi.body) for v in range(G.n))

    if phi.threshold == 0:
        return True
    count = 0
    for v in range(G.n):
        if _holds(G, {**env, phi.var: v}, phi.body):
            count += 1
            if count >= phi.threshold:
                return True
    return False


# ==================== 隨機公式 ====================

class _RandomFormula:
    """在 C^(k1,k2)_rank 內產生公式；y 變數不重複量化，也不量化自由的 y"""

    def __init__(self, rng: random.Random, k1: int, k2: int, n: int, colors: Sequence[int], max_size: int):
        self.rng = rng
        self.xs = [f"x{i}" for i in range(1, k1 + 1)]
        self.ys = [f"y{j}" for j in range(1, k2 + 1)]
        self.n = n
        self.colors = list(colors) or [0]
        self.budget = max_size

    def atom(self, scope: Sequence[str]) -> Formula:
        kind = self.rng.randrange(3)
        if kind == 0:
            return HasColor(self.rng.choice(self.colors), self.rng.choice(scope))
        a, b = self.rng.choice(scope), self.rng.choice(scope)
        return Eq(a, b) if kind == 1 else Edge(a, b)

    def build(self, rank: int, scope: Tuple[str, ...], blocked_y: FrozenSet[str]) -> Formula:
        self.budget -= 1
        quantifiable = self.xs + [y for y in self.ys if y not in blocked_y]
        can_quantify = rank > 0 and bool(quantifiable)
        if not scope and not can_quantify:
            raise ConfigurationError("cannot build a formula without variables in scope")

        options = []
        if scope:
            options += ["atom"] * 2
        if self.budget > 0:
            if scope or can_quantify:
                options += ["not", "and", "or", "implies"]
            if can_quantify:
                options += ["count"] * 3 + ["forall", "exists"]
        if not options:
            options = ["atom"] if scope else ["count"]
        choice = self.rng.choice(options)

        if choice == "atom":
            return self.atom(scope)
        if choice == "not":
            return Not(self.build(rank, scope, blocked_y))
        if choice in ("and", "or", "implies"):
            node = {"and": And, "or": Or, "implies": Implies}[choice]
            return node(self.build(rank, scope, blocked_y), self.build(rank, scope, blocked_y))

        var = self.rng.choice(quantifiable)
        inner_scope = tuple(sorted(set(scope) | {var}))
        inner_blocked = blocked_y | {var} if var.startswith("y") else blocked_y
        body = self.build(rank - 1, inner_scope, inner_blocked)
        if choice == "count":
            return CountExists(self.rng.randint(0, self.n + 1), var, body)
        return Forall(var, body) if choice == "forall" else Exists(var, body)


def random_formula(
    k1: int,
    k2: int,
    rank: int,
    n: int,
    seed: int = 0,
    free: Sequence[str] = (),
    colors: Sequence[int] = (0,),
    max_size: int = 12,
    rng: Optional[random.Random] = None,
) -> Formula:
    """
    隨機 C^(k1,k2)_rank 公式

    Args:
        k1, k2: 變數預算
        rank: 量詞深度上限
        n: 圖的大小（門檻上限為 n+1）
        seed: rng 未提供時使用
        free: 允許出現的自由變數；其中的 y 一定自由出現（以 y=y 補齊），x 可以不出現
        colors: 原子式可用的顏色
        max_size: 節點數的大致上限
        rng: 共用的 random.Random

    Returns:
        free(φ) ∩ [x] ⊆ free 且 free(φ) ∩ [y] = free ∩ [y] 的公式
    """
    names = set(variable_names(k1, k2))
    unknown = sorted(set(free) - names)
    if unknown:
        raise ConfigurationError(f"free variables {unknown} are not in [x{k1}, y{k2}]")
    rng = rng or random.Random(seed)
    generator = _RandomFormula(rng, k1, k2, n, colors, max_size)
    free_y = frozenset(v for v in free if v.startswith("y"))
    phi = generator.build(rank, tuple(sorted(free)), free_y)
    for y in sorted(free_y - free_variables(phi)):
        phi = And(phi, Eq(y, y))
    return phi


def iter_subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    if isinstance(phi, Not) or isinstance(phi, QUANTIFIERS):
        yield from iter_subformulas(phi.body)
    elif isinstance(phi, BINARY):
        yield from iter_subformulas(phi.left)
        yield from iter_subformulas(phi.right)
