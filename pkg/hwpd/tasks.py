from enum import Enum
from typing import Tuple


class TaskId(str, Enum):
    Alphabet = "Alphabet"
    CircleTemplate = "CircleTemplate"
    Cube = "Cube"
    FreeWriting = "FreeWriting"
    House = "House"
    Id = "Id"
    Name = "Name"
    Numbers = "Numbers"
    Line1 = "Line1"
    Line2 = "Line2"
    Rectangles = "Rectangles"
    Rey = "Rey"
    Rhombus = "Rhombus"
    Signature = "Signature"
    Spiral = "Spiral"
    SpiralTemplate = "SpiralTemplate"
    Circle = "Circle"

    @property
    def is_optimization_task(self) -> bool:
        return self is OPTIMIZATION_TASK


class Group(str, Enum):
    PD = "PD"
    EHC = "EHC"
    YHC = "YHC"


class Experiment(str, Enum):
    YHCvsPD = "yhc-vs-pd"
    EHCvsPD = "ehc-vs-pd"
    YHCvsEHC = "yhc-vs-ehc"

    @property
    def groups(self) -> Tuple[Group, Group]:
        """(negative class, positive class)"""
        return {
            Experiment.YHCvsPD: (Group.YHC, Group.PD),
            Experiment.EHCvsPD: (Group.EHC, Group.PD),
            Experiment.YHCvsEHC: (Group.YHC, Group.EHC),
        }[self]

    def label_of(self, group: Group) -> int:
        negative, positive = self.groups
        if group == positive:
            return 1
        if group == negative:
            return 0
        raise ValueError(f"Group {group} does not take part in experiment {self.value}")


OPTIMIZATION_TASK = TaskId.Circle
ALL_TASKS: Tuple[TaskId, ...] = tuple(TaskId)
TEST_TASKS: Tuple[TaskId, ...] = tuple(t for t in TaskId if t is not OPTIMIZATION_TASK)

# tasks for which no neuromotor block is computed
NEUROMOTOR_SKIP_TASKS = frozenset({TaskId.Alphabet, TaskId.FreeWriting, TaskId.Rey})


def parse_task(name: str) -> TaskId:
    try:
        return TaskId(name)
    except ValueError:
        raise ValueError(f"Unknown task '{name}'. Available: {[t.value for t in TaskId]}")
