from .embeddings import EmbeddingTable, load_embeddings, random_embeddings
from .tokenize import load_stopwords, tokenize
from .vocab import EncodedNote, Vocabulary, build_vocab, encode, load_encoded, save_encoded, stack_ids
