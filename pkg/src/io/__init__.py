from .file_manager import FileManager
from .export import CSVExporter, LPWriter

__all__ = ["FileManager", "CSVExporter", "LPWriter"]
