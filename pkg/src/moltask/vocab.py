"""Token vocabulary and integer encoding for the language model."""

from dataclasses import dataclass, field

from .errors import OutOfVocabulary, SequenceTooLong
from .smiles import tokenize

PAD = "<pad>"
BOS = "<bos>"
EOS = "<eos>"
MARKERS = (PAD, BOS, EOS)

# 33 tokens, matching the original experiments' vocabulary size. Corpora
# that tokenize outside this set need build_vocab instead.
DEFAULT_TOKENS = MARKERS + (
    "B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I",
    "c", "n", "o", "s",
    "-", "=", "#", ":",
    "(", ")",
    "1", "2", "3", "4", "5", "6", "7", "8", "9",
    "[nH]",
)

DEFAULT_MAX_SEQ_LEN = 82


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    _ids: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = {tok: i for i, tok in enumerate(self.tokens)}
        if len(ids) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")
        for marker in MARKERS:
            if marker not in ids:
                raise ValueError(f"vocabulary must contain {marker}")
        object.__setattr__(self, "_ids", ids)

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return self._ids[PAD]

    @property
    def bos_id(self) -> int:
        return self._ids[BOS]

    @property
    def eos_id(self) -> int:
        return self._ids[EOS]

    def id_of(self, token: str) -> int:
        try:
            return self._ids[token]
        except KeyError:
            raise OutOfVocabulary(token) from None

    def __contains__(self, token: str) -> bool:
        return token in self._ids


def default_vocabulary() -> Vocabulary:
    return Vocabulary(DEFAULT_TOKENS)


def build_vocab(smiles_list: list[str]) -> Vocabulary:
    """Vocabulary covering every token in a corpus, markers first."""
    seen = set()
    for s in smiles_list:
        seen.update(tokenize(s))
    return Vocabulary(MARKERS + tuple(sorted(seen)))


@dataclass(frozen=True)
class TokenSequence:
    """Begin/end-delimited token ids, bounded by the model's input length."""

    ids: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.ids)


def encode(tokens: list[str], vocab: Vocabulary, max_len: int = DEFAULT_MAX_SEQ_LEN) -> TokenSequence:
    """Map tokens to ids, wrapped in begin/end markers.

    Raises OutOfVocabulary for unknown tokens and SequenceTooLong when the
    delimited sequence exceeds max_len.
    """
    ids = [vocab.bos_id] + [vocab.id_of(t) for t in tokens] + [vocab.eos_id]
    if len(ids) > max_len:
        raise SequenceTooLong(len(ids), max_len)
    return TokenSequence(tuple(ids))


def encode_smiles(s: str, vocab: Vocabulary, max_len: int = DEFAULT_MAX_SEQ_LEN) -> TokenSequence:
    return encode(tokenize(s), vocab, max_len)


def decode(seq: TokenSequence, vocab: Vocabulary) -> str:
    """Token ids back to a string; begin/end/pad markers are dropped."""
    skip = {vocab.pad_id, vocab.bos_id, vocab.eos_id}
    return "".join(vocab.tokens[i] for i in seq.ids if i not in skip)
