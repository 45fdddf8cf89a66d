from .analyzer import AnalyzerConfig, analyze, term_vector, load_stopwords
from .porter import stem

__all__ = ["AnalyzerConfig", "analyze", "term_vector", "load_stopwords", "stem"]
