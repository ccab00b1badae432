"""Reading and writing price CSVs and JSON-lines corpora."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import OrderedDict
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable

from .core import CandidateSeries, Market, Outcome
from .errors import DuplicateId, EmptyMarket, ParseError, SchemaError

PRICE_HEADER = ("market_id", "candidate_id", "date", "price", "outcome")
CORPUS_FIELDS = frozenset({"doc_id", "date", "source", "text"})


@dataclass(frozen=True)
class RawPriceRow:
    market_id: str
    candidate_id: str
    date: date
    price: float
    outcome: Outcome | None = None


@dataclass(frozen=True)
class Document:
    doc_id: str
    date: date
    source: str
    text: str


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...] = ()

    def __post_init__(self):
        docs = tuple(self.documents)
        object.__setattr__(self, "documents", docs)
        seen = set()
        for doc in docs:
            if doc.doc_id in seen:
                raise DuplicateId(f"duplicate doc_id {doc.doc_id!r}")
            seen.add(doc.doc_id)

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)


def parse_date(text: str) -> date:
    """Strict ``YYYY-MM-DD``."""
    text = text.strip()
    if len(text) != 10:
        raise ValueError(f"not an ISO date: {text!r}")
    return date.fromisoformat(text)


def _parse_price_row(row: list[str], line: int) -> RawPriceRow:
    if len(row) != len(PRICE_HEADER):
        raise ParseError(f"expected {len(PRICE_HEADER)} fields, got {len(row)}", line)
    market_id, candidate_id, date_text, price_text, outcome_text = (f.strip() for f in row)
    if not market_id or not candidate_id:
        raise ParseError("market_id and candidate_id must be non-empty", line)
    try:
        day = parse_date(date_text)
    except ValueError as exc:
        raise ParseError(str(exc), line) from None
    try:
        price = float(price_text)
    except ValueError:
        raise ParseError(f"price {price_text!r} is not a number", line) from None
    if not math.isfinite(price) or price < 0:
        raise SchemaError(f"price {price_text!r} outside [0, inf)", line)
    outcome = None
    if outcome_text:
        try:
            outcome = Outcome.parse(outcome_text)
        except ValueError:
            raise ParseError(f"outcome must be 'won' or 'lost', got {outcome_text!r}", line) from None
    return RawPriceRow(market_id, candidate_id, day, price, outcome)


def read_price_rows(source) -> list[tuple[int, RawPriceRow]]:
    """Parse a price CSV into ``(line_number, row)`` pairs."""
    rows = []
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None:
        raise ParseError("empty file: missing header", 1)
    if tuple(h.strip() for h in header) != PRICE_HEADER:
        raise ParseError(f"header must be {','.join(PRICE_HEADER)}", 1)
    for row in reader:
        line = reader.line_num
        if not row or all(not f.strip() for f in row):
            continue
        rows.append((line, _parse_price_row(row, line)))
    return rows


def markets_from_rows(rows: Iterable[tuple[int, RawPriceRow]]) -> list[Market]:
    """Group rows into markets, keeping the last row per candidate and date.

    Offsets are measured from the latest date seen anywhere in the market.
    Markets and candidates keep first-appearance order.
    """
    grouped: OrderedDict[str, OrderedDict[str, dict]] = OrderedDict()
    for line, row in rows:
        cands = grouped.setdefault(row.market_id, OrderedDict())
        entry = cands.setdefault(row.candidate_id, {"prices": {}, "outcome": None, "line": line})
        entry["prices"][row.date] = row.price
        if row.outcome is not None:
            if entry["outcome"] is not None and entry["outcome"] is not row.outcome:
                raise SchemaError(
                    f"candidate {row.market_id}/{row.candidate_id} labelled both won and lost", line
                )
            entry["outcome"] = row.outcome

    markets = []
    for market_id, cands in grouped.items():
        end = max(day for entry in cands.values() for day in entry["prices"])
        series = []
        for candidate_id, entry in cands.items():
            if entry["outcome"] is None:
                raise SchemaError(f"candidate {market_id}/{candidate_id} has no won/lost label", entry["line"])
            days = sorted(entry["prices"])
            series.append(
                CandidateSeries(
                    market_id,
                    candidate_id,
                    entry["outcome"],
                    [d.toordinal() - end.toordinal() for d in days],
                    [entry["prices"][d] for d in days],
                    end,
                )
            )
        markets.append(Market(market_id, tuple(series)))
    return markets


def load_prices(path) -> list[Market]:
    with open(path, newline="", encoding="utf-8") as fh:
        return markets_from_rows(read_price_rows(fh))


def align_markets(markets: Iterable[Market]) -> list[Market]:
    """Shift each market so its latest trading day is offset 0.

    Offsets are shifted as a block per market, so gaps stay gaps and a
    candidate that stopped trading early keeps its distance from the end.
    """
    out = []
    for market in markets:
        if not market.candidates or any(len(c) == 0 for c in market.candidates):
            raise EmptyMarket(f"market {market.market_id!r} has an empty series")
        last = max(int(c.offsets[-1]) for c in market.candidates)
        if last == 0:
            out.append(market)
        else:
            out.append(Market(market.market_id, tuple(c.shifted(-last) for c in market.candidates)))
    return out


def format_price(price: float) -> str:
    return repr(float(price))


def write_prices(markets: Iterable[Market], target) -> None:
    """Write markets in the price CSV schema.

    ``target`` is a path or a text stream. Series without an ``end_date``
    cannot be written, since the schema carries calendar dates.
    """
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            write_prices(markets, fh)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(PRICE_HEADER)
    for market in markets:
        for c in market.candidates:
            if c.end_date is None:
                raise SchemaError(f"series {c.market_id}/{c.candidate_id} has no end_date to anchor dates")
            label = c.outcome.value
            for offset, price in zip(c.offsets.tolist(), c.prices.tolist()):
                writer.writerow((c.market_id, c.candidate_id, c.date_of(offset).isoformat(), format_price(price), label))


def prices_to_csv(markets: Iterable[Market]) -> str:
    buf = io.StringIO()
    write_prices(markets, buf)
    return buf.getvalue()


def _parse_document(text: str, line: int) -> Document:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line) from None
    if not isinstance(obj, dict):
        raise ParseError("record must be a JSON object", line)
    missing = CORPUS_FIELDS - obj.keys()
    if missing:
        raise ParseError(f"missing field(s): {', '.join(sorted(missing))}", line)
    extra = obj.keys() - CORPUS_FIELDS
    if extra:
        raise ParseError(f"unexpected field(s): {', '.join(sorted(extra))}", line)
    for key in CORPUS_FIELDS:
        if not isinstance(obj[key], str):
            raise ParseError(f"field {key!r} must be a string", line)
    try:
        day = parse_date(obj["date"])
    except ValueError as exc:
        raise ParseError(str(exc), line) from None
    return Document(obj["doc_id"], day, obj["source"], obj["text"])


def read_corpus(lines: Iterable[str]) -> Corpus:
    docs, seen = [], set()
    for line_no, text in enumerate(lines, start=1):
        if not text.strip():
            continue
        doc = _parse_document(text, line_no)
        if doc.doc_id in seen:
            raise DuplicateId(f"duplicate doc_id {doc.doc_id!r}", line_no)
        seen.add(doc.doc_id)
        docs.append(doc)
    return Corpus(tuple(docs))


def load_corpus(path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return read_corpus(fh)


def write_corpus(corpus: Iterable[Document], target) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            write_corpus(corpus, fh)
        return
    for doc in corpus:
        record = {"doc_id": doc.doc_id, "date": doc.date.isoformat(), "source": doc.source, "text": doc.text}
        target.write(json.dumps(record, ensure_ascii=False) + "\n")
