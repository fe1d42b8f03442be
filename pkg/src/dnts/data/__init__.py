from dnts.simkit.graph import descendant_sets

from .collate import ExampleInputDataset, collate_fn, make_dataloader, make_example_input, sample_message_pairs
from .dataset import SPLITS, PromotionDataset, build_dataset, load_dataset, save_dataset
from .descendants import DescendantIndex, sample_descendants
from .examples import TrainingExample, build_examples, build_item_examples
from .incidence import IncidenceMatrix, build_incidence, build_vocabulary
from .serialization import read_examples, write_examples
from .split import split_items
from .subtable import SubTable, build_subtable
