from .config import StudyConfig, StudyItem
from .store import SessionStore, export_dataset, verify_manifest
from .dataset import compute_scores, load_dataset

__all__ = ["StudyConfig", "StudyItem", "SessionStore", "export_dataset",
           "verify_manifest", "compute_scores", "load_dataset"]
