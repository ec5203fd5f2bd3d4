# -*- coding: utf-8 -*-
"""
网格地图
ASCII 地图解析、连通性检查、内置地图与程序化生成
"""

import dataclasses
from collections import deque
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Optional

import numpy as np

from ..core.const import (
    DEFAULT_GOAL_REWARD,
    DEFAULT_STEP_LIMIT,
    DEFAULT_STEP_PENALTY,
    DEFAULT_WATER_PENALTY,
)
from ..core.exceptions import (
    MapError,
    NoGoalError,
    NonRectangularError,
    NoStartError,
    UnknownCharError,
    UnreachableGoalError,
)
from ..core.logger import get_logger

logger = get_logger()

Cell = tuple[int, int]


class Tile(IntEnum):
    """格子类型，取值同时是观测张量中的通道号"""

    EMPTY = 0
    WALL = 1
    WATER = 2
    GOAL = 3


class Action(IntEnum):
    NORTH = 0
    SOUTH = 1
    EAST = 2
    WEST = 3


ACTION_DELTAS: tuple[Cell, ...] = ((-1, 0), (1, 0), (0, 1), (0, -1))

CHAR_TO_TILE = {
    "#": Tile.WALL,
    ".": Tile.EMPTY,
    "W": Tile.WATER,
    "G": Tile.GOAL,
    "S": Tile.EMPTY,
}

TILE_TO_CHAR = {
    Tile.WALL: "#",
    Tile.EMPTY: ".",
    Tile.WATER: "W",
    Tile.GOAL: "G",
}


@dataclass(frozen=True, eq=False)
class GridMap:
    """不可变的网格地图

    tiles 为只读的 (height, width) 整数数组。未写 ``S`` 的地图把所有空格作为出生格，
    此时 implicit_starts 为 True。goal_terminal 为 False 时进入目标格不结束回合。
    """

    tiles: np.ndarray
    start_cells: tuple[Cell, ...]
    step_penalty: float = DEFAULT_STEP_PENALTY
    water_penalty: float = DEFAULT_WATER_PENALTY
    goal_reward: float = DEFAULT_GOAL_REWARD
    step_limit: int = DEFAULT_STEP_LIMIT
    implicit_starts: bool = False
    name: str = ""
    goal_terminal: bool = True

    @property
    def height(self) -> int:
        return int(self.tiles.shape[0])

    @property
    def width(self) -> int:
        return int(self.tiles.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def tile(self, cell: Cell) -> Tile:
        return Tile(int(self.tiles[cell]))

    def in_bounds(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < self.height and 0 <= c < self.width

    def is_passable(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and self.tiles[cell] != Tile.WALL

    def passable_cells(self) -> list[Cell]:
        """所有非墙格，按行优先顺序"""
        rows, cols = np.nonzero(self.tiles != Tile.WALL)
        return [(int(r), int(c)) for r, c in zip(rows, cols)]

    def goal_cells(self) -> list[Cell]:
        rows, cols = np.nonzero(self.tiles == Tile.GOAL)
        return [(int(r), int(c)) for r, c in zip(rows, cols)]

    def ends_episode(self, cell: Cell) -> bool:
        return self.goal_terminal and self.tiles[cell] == Tile.GOAL

    def without_goal_exit(self) -> "GridMap":
        """目标格不再终止回合的副本，回合只会因步数上限结束"""
        return dataclasses.replace(self, goal_terminal=False)

    def reward_for(self, cell: Cell) -> float:
        """占据某格时获得的奖励"""
        kind = self.tiles[cell]
        if kind == Tile.GOAL:
            return self.goal_reward
        if kind == Tile.WATER:
            return self.water_penalty
        return self.step_penalty

    def with_rewards(
        self,
        step_penalty: Optional[float] = None,
        water_penalty: Optional[float] = None,
        goal_reward: Optional[float] = None,
        step_limit: Optional[int] = None,
    ) -> "GridMap":
        """返回只修改奖励参数的新地图，布局不变"""
        changes = {
            "step_penalty": step_penalty,
            "water_penalty": water_penalty,
            "goal_reward": goal_reward,
            "step_limit": step_limit,
        }
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def same_topology(self, other: "GridMap") -> bool:
        """布局 (格子与出生格) 是否一致"""
        return (
            self.tiles.shape == other.tiles.shape
            and bool(np.array_equal(self.tiles, other.tiles))
            and self.start_cells == other.start_cells
        )

    def to_text(self) -> str:
        rows = []
        starts = set() if self.implicit_starts else set(self.start_cells)
        for r in range(self.height):
            line = []
            for c in range(self.width):
                if (r, c) in starts:
                    line.append("S")
                else:
                    line.append(TILE_TO_CHAR[Tile(int(self.tiles[r, c]))])
            rows.append("".join(line))
        return "\n".join(rows) + "\n"


def neighbor(grid_map: GridMap, cell: Cell, action: int) -> Cell:
    """执行动作后的格子；撞墙或出界则原地不动"""
    dr, dc = ACTION_DELTAS[action]
    target = (cell[0] + dr, cell[1] + dc)
    return target if grid_map.is_passable(target) else cell


def _check_connectivity(tiles: np.ndarray) -> list[Cell]:
    """从目标格反向 BFS，返回无法到达目标的非墙格"""
    height, width = tiles.shape
    reached = np.zeros_like(tiles, dtype=bool)
    queue: deque[Cell] = deque()
    for r, c in zip(*np.nonzero(tiles == Tile.GOAL)):
        reached[r, c] = True
        queue.append((int(r), int(c)))

    while queue:
        r, c = queue.popleft()
        for dr, dc in ACTION_DELTAS:
            nr, nc = r + dr, c + dc
            if 0 <= nr < height and 0 <= nc < width:
                if not reached[nr, nc] and tiles[nr, nc] != Tile.WALL:
                    reached[nr, nc] = True
                    queue.append((nr, nc))

    rows, cols = np.nonzero((tiles != Tile.WALL) & ~reached)
    return [(int(r), int(c)) for r, c in zip(rows, cols)]


def parse_map(text: str, name: str = "", **params) -> GridMap:
    """解析 ASCII 地图

    Args:
        text: 换行分隔的地图文本，字符集为 ``# . W G S``
        name: 地图名称
        **params: 传给 GridMap 的奖励参数 (step_penalty 等)

    Returns:
        通过全部不变量检查的 GridMap

    Raises:
        NonRectangularError: 行宽不一致或地图为空
        UnknownCharError: 出现未知字符
        NoGoalError: 没有目标格
        UnreachableGoalError: 有格子到不了目标；没有出生格时为 NoStartError
    """
    lines = [line.rstrip("\r") for line in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    while lines and not lines[0]:
        lines.pop(0)
    if not lines:
        raise NonRectangularError("地图为空")

    width = len(lines[0])
    for r, line in enumerate(lines):
        if len(line) != width:
            raise NonRectangularError(f"第 {r + 1} 行宽度为 {len(line)}，应为 {width}")

    tiles = np.empty((len(lines), width), dtype=np.int8)
    explicit_starts: list[Cell] = []
    for r, line in enumerate(lines):
        for c, ch in enumerate(line):
            if ch not in CHAR_TO_TILE:
                raise UnknownCharError(f"未知字符 {ch!r} (第 {r + 1} 行，第 {c + 1} 列)")
            tiles[r, c] = CHAR_TO_TILE[ch]
            if ch == "S":
                explicit_starts.append((r, c))

    if not np.any(tiles == Tile.GOAL):
        raise NoGoalError("地图中没有目标格 G")

    if explicit_starts:
        starts = tuple(explicit_starts)
    else:
        rows, cols = np.nonzero(tiles == Tile.EMPTY)
        starts = tuple((int(r), int(c)) for r, c in zip(rows, cols))
    if not starts:
        raise NoStartError("地图中没有可用的出生格")

    unreachable = _check_connectivity(tiles)
    if unreachable:
        raise UnreachableGoalError(f"以下格子无法到达目标: {unreachable[:8]}")

    tiles.setflags(write=False)
    return GridMap(
        tiles=tiles,
        start_cells=starts,
        implicit_starts=not explicit_starts,
        name=name,
        **params,
    )


# =============================================================================
# 程序化生成
# =============================================================================


def rooms_map(rows: int, cols: int, room_size: int) -> str:
    """生成房间网格地图文本

    rows × cols 个边长为 room_size 的房间，相邻房间之间的墙在中点开一个门。
    目标放在右下房间的右下角，不写出生格。
    """
    if rows < 1 or cols < 1 or room_size < 1:
        raise MapError("房间数与房间边长必须为正")

    step = room_size + 1
    height, width = rows * step + 1, cols * step + 1
    grid = np.full((height, width), ".", dtype="<U1")
    grid[::step, :] = "#"
    grid[:, ::step] = "#"

    mid = room_size // 2
    for i in range(rows):
        for j in range(cols):
            top, left = i * step + 1, j * step + 1
            if j + 1 < cols:
                grid[top + mid, left + room_size] = "."
            if i + 1 < rows:
                grid[top + room_size, left + mid] = "."

    grid[height - 2, width - 2] = "G"
    return "\n".join("".join(row) for row in grid) + "\n"


def random_maze(height: int, width: int, seed: int, water_fraction: float = 0.0) -> str:
    """深度优先挖掘的随机迷宫

    height 与 width 会被向上取为奇数。目标在右下角，水格随机撒在通道上，不影响连通性。
    """
    height = max(5, height | 1)
    width = max(5, width | 1)
    rng = np.random.default_rng(seed)
    grid = np.full((height, width), "#", dtype="<U1")

    stack: list[Cell] = [(1, 1)]
    grid[1, 1] = "."
    while stack:
        r, c = stack[-1]
        options = [
            (r + 2 * dr, c + 2 * dc, dr, dc)
            for dr, dc in ACTION_DELTAS
            if 0 < r + 2 * dr < height - 1
            and 0 < c + 2 * dc < width - 1
            and grid[r + 2 * dr, c + 2 * dc] == "#"
        ]
        if not options:
            stack.pop()
            continue
        nr, nc, dr, dc = options[int(rng.integers(len(options)))]
        grid[r + dr, c + dc] = "."
        grid[nr, nc] = "."
        stack.append((nr, nc))

    goal = (height - 2, width - 2)
    grid[goal] = "G"
    if water_fraction > 0.0:
        open_cells = [cell for cell in zip(*np.nonzero(grid == ".")) if cell != (1, 1)]
        n_water = int(round(water_fraction * len(open_cells)))
        if n_water:
            picks = rng.choice(len(open_cells), size=n_water, replace=False)
            for k in sorted(picks):
                grid[open_cells[k]] = "W"
    grid[1, 1] = "S"
    return "\n".join("".join(row) for row in grid) + "\n"


# =============================================================================
# 内置地图
# =============================================================================

BUILTIN_MAPS: dict[str, str] = {
    "corridor": "#####\n#S.G#\n#####\n",
    "test_maze": (
        "##########\n"
        "#......WG#\n"
        "#.####.W.#\n"
        "#.#..#...#\n"
        "#.#..W.#.#\n"
        "#...WW.#.#\n"
        "#.##...#.#\n"
        "#.#..#...#\n"
        "#S...#.#.#\n"
        "##########\n"
    ),
    "open_room_5": "#######\n#....G#\n#.....#\n#.....#\n#.....#\n#.....#\n#######\n",
    "two_rooms": rooms_map(1, 2, 5),
    "four_rooms": rooms_map(2, 2, 5),
}


def builtin_map_names() -> list[str]:
    return sorted(BUILTIN_MAPS)


def load_map(source: str | Path, **params) -> GridMap:
    """加载地图

    Args:
        source: ``builtin:<name>``、内置地图名或 ASCII 地图文件路径
        **params: 覆盖奖励参数

    Returns:
        GridMap
    """
    text_source = str(source)
    name = text_source[len("builtin:"):] if text_source.startswith("builtin:") else text_source
    if name in BUILTIN_MAPS:
        logger.debug(f"使用内置地图: {name}")
        return parse_map(BUILTIN_MAPS[name], name=name, **params)
    if text_source.startswith("builtin:"):
        raise MapError(f"未知的内置地图: {name}，可选: {builtin_map_names()}")

    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise MapError(f"读取地图文件失败: {e}") from e
    logger.debug(f"地图已加载: {path}")
    return parse_map(text, name=path.stem, **params)
