# repository/__init__.py
"""
Repository 層
"""
from repository.base_repository import BaseRepository, RepositoryError
from repository.graph_repository import GraphRepository, dumps_graph, loads_graph
from repository.report_repository import ReportRepository, frame_to_csv, to_json

__all__ = [
    'BaseRepository',
    'RepositoryError',
    'GraphRepository',
    'ReportRepository',
    'dumps_graph',
    'loads_graph',
    'frame_to_csv',
    'to_json',
]
