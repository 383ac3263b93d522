"""
Coarse angle scripts of the tasks: how the pen direction turns over the
lognormal components of a stroke.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List

import numpy as np

from hwpd.tasks import TaskId

TURN_JITTER = 0.1


class TurnPattern(str, Enum):
    # the whole turn spread evenly over the components
    ARC = "arc"
    # every component turns by the same angle
    LOOPS = "loops"
    # alternating left and right turns
    ZIGZAG = "zigzag"
    # straight sides joined by corners of the given exterior angle
    SEGMENTS = "segments"


@dataclass(frozen=True)
class StrokeScript:
    pattern: TurnPattern
    turn: float
    heading: float = 0.0
    path_scale: float = 1.0


def component_turns(script: StrokeScript, n: int, rng: np.random.Generator) -> np.ndarray:
    """Direction change carried by each of ``n`` components."""
    if script.pattern is TurnPattern.ARC:
        turns = np.full(n, script.turn / n)
    elif script.pattern is TurnPattern.LOOPS:
        turns = np.full(n, script.turn)
    elif script.pattern is TurnPattern.ZIGZAG:
        turns = script.turn * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    else:
        turns = np.full(n, script.turn)
        turns[0] = 0.0
    return turns + rng.normal(0.0, TURN_JITTER, size=n)


_WRITING = TurnPattern.ZIGZAG
_QUARTER = np.pi / 2

TASK_SCRIPTS: Dict[TaskId, List[StrokeScript]] = {
    TaskId.Alphabet: [StrokeScript(_WRITING, 2.0)],
    TaskId.CircleTemplate: [StrokeScript(TurnPattern.ARC, 2 * np.pi, heading=_QUARTER)],
    TaskId.Cube: [StrokeScript(TurnPattern.SEGMENTS, _QUARTER, heading=0.3),
                  StrokeScript(TurnPattern.SEGMENTS, 2 * np.pi / 3, heading=np.pi / 4, path_scale=0.6)],
    TaskId.FreeWriting: [StrokeScript(_WRITING, 2.4), StrokeScript(_WRITING, 1.8, heading=0.2)],
    TaskId.House: [StrokeScript(TurnPattern.SEGMENTS, _QUARTER),
                   StrokeScript(TurnPattern.SEGMENTS, 2 * np.pi / 3, heading=np.pi / 3, path_scale=0.7)],
    TaskId.Id: [StrokeScript(_WRITING, 1.6, heading=0.4, path_scale=0.7)],
    TaskId.Name: [StrokeScript(_WRITING, 2.2, path_scale=0.9)],
    TaskId.Numbers: [StrokeScript(TurnPattern.LOOPS, -1.2, heading=0.5, path_scale=0.6)],
    TaskId.Line1: [StrokeScript(TurnPattern.LOOPS, np.pi, path_scale=1.4)],
    TaskId.Line2: [StrokeScript(_WRITING, np.pi, path_scale=1.4)],
    TaskId.Rectangles: [StrokeScript(TurnPattern.SEGMENTS, _QUARTER)],
    TaskId.Rey: [StrokeScript(TurnPattern.SEGMENTS, _QUARTER, heading=h, path_scale=s)
                 for h, s in ((0.0, 1.2), (_QUARTER, 0.8), (np.pi / 4, 1.0), (-np.pi / 4, 0.7), (np.pi, 0.5))],
    TaskId.Rhombus: [StrokeScript(TurnPattern.SEGMENTS, _QUARTER, heading=np.pi / 4)],
    TaskId.Signature: [StrokeScript(_WRITING, 2.6, heading=0.1), StrokeScript(TurnPattern.LOOPS, 1.5)],
    TaskId.Spiral: [StrokeScript(TurnPattern.ARC, 6 * np.pi, path_scale=1.6)],
    TaskId.SpiralTemplate: [StrokeScript(TurnPattern.ARC, 6 * np.pi, heading=np.pi, path_scale=1.6)],
    TaskId.Circle: [StrokeScript(TurnPattern.ARC, 2 * np.pi)],
}


def task_script(task: TaskId) -> List[StrokeScript]:
    return TASK_SCRIPTS[TaskId(task)]
