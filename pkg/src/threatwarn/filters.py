"""Dictionary exclusion filtering and the threat co-occurrence gate.

A window's terms pass through two stages: first every term found in any
exclusion dictionary (common-language, stopword, foreign-language,
technical) or in the threat dictionary itself is removed; then a surviving
term becomes a candidate only if, somewhere in its supporting posts, a
threat-dictionary term appears in the same post. Those co-occurring threat
terms become the candidate's context.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime

from .ingest import (
    Dictionary,
    DictionaryRole,
    EXCLUSION_ROLES,
    LANGUAGE_ROLES,
    WindowBatch,
)
from .textproc import TermCounts, term_set

CONTEXT_THREAT_ONLY = "threat-only"
CONTEXT_AUGMENTED = "augmented"
CONTEXT_MODES = (CONTEXT_THREAT_ONLY, CONTEXT_AUGMENTED)


@dataclass(frozen=True)
class FilterChain:
    """The ordered exclusion dictionaries plus the single threat dictionary."""

    exclusion_dictionaries: tuple[Dictionary, ...]
    threat_dictionary: Dictionary

    def __post_init__(self) -> None:
        if not self.exclusion_dictionaries:
            raise ValueError("at least one exclusion dictionary is required")
        if self.threat_dictionary.role is not DictionaryRole.THREAT:
            raise ValueError(
                f"threat dictionary has role {self.threat_dictionary.role.value!r}"
            )
        seen: set[tuple[str, DictionaryRole]] = set()
        for dictionary in (*self.exclusion_dictionaries, self.threat_dictionary):
            if dictionary.role is DictionaryRole.THREAT and dictionary is not self.threat_dictionary:
                raise ValueError("only one threat dictionary is allowed")
            if dictionary.role not in EXCLUSION_ROLES | {DictionaryRole.THREAT}:
                raise ValueError(f"unexpected dictionary role {dictionary.role!r}")
            key = (dictionary.name, dictionary.role)
            if key in seen:
                raise ValueError(f"dictionary listed twice: {dictionary.name!r}")
            seen.add(key)

    def is_excluded(self, term: str) -> bool:
        """True when the term is known vocabulary (never a candidate)."""
        if term in self.threat_dictionary.terms:
            return True
        return any(term in d.terms for d in self.exclusion_dictionaries)

    def technical_terms(self) -> frozenset[str]:
        """Union of all technical-role dictionary terms."""
        terms: set[str] = set()
        for dictionary in self.exclusion_dictionaries:
            if dictionary.role is DictionaryRole.TECHNICAL:
                terms |= dictionary.terms
        return frozenset(terms)

    def language_terms(self) -> frozenset[str]:
        """Union of the ordinary-language dictionaries (common/stopword/foreign)."""
        terms: set[str] = set()
        for dictionary in self.exclusion_dictionaries:
            if dictionary.role in LANGUAGE_ROLES:
                terms |= dictionary.terms
        return frozenset(terms)


@dataclass
class CandidateTerm:
    """A term that survived all filters within one window."""

    term: str
    window_start: datetime
    tweet_frequency: int
    supporters: set[str]
    context_terms: set[str]


def exclude_known(term_counts: TermCounts, chain: FilterChain) -> TermCounts:
    """Drop every term present in any exclusion dictionary or the threat dictionary."""
    counts = {t: n for t, n in term_counts.counts.items() if not chain.is_excluded(t)}
    supporters = {t: set(term_counts.supporters[t]) for t in counts}
    return TermCounts(
        window_start=term_counts.window_start, counts=counts, supporters=supporters
    )


def require_threat_context(
    term_counts: TermCounts, batch: WindowBatch, chain: FilterChain
) -> list[CandidateTerm]:
    """Keep terms that share a post with at least one threat-dictionary term.

    Co-occurrence is scoped to the individual post. The co-occurring threat
    terms become the candidate's context set. Candidates come back sorted by
    term for deterministic downstream output.
    """
    post_tokens = {post.id: term_set(post.text) for post in batch.posts}
    threat_terms = chain.threat_dictionary.terms
    candidates: list[CandidateTerm] = []
    for term in sorted(term_counts.counts):
        supporters = term_counts.supporters[term]
        context: set[str] = set()
        for post_id in supporters:
            context |= post_tokens.get(post_id, set()) & threat_terms
        if not context:
            continue
        candidates.append(
            CandidateTerm(
                term=term,
                window_start=term_counts.window_start,
                tweet_frequency=term_counts.counts[term],
                supporters=set(supporters),
                context_terms=context,
            )
        )
    return candidates


def augmented_context(
    candidate: CandidateTerm, batch: WindowBatch, chain: FilterChain, enabled: bool = True
) -> set[str]:
    """Widen a candidate's context with co-occurring expert jargon.

    When enabled, technical-dictionary terms found in the candidate's
    supporting posts join the threat-term context, except those that are
    also ordinary-language words (anything in a common-language, stopword,
    or foreign-language dictionary): a jargon term that doubles as an
    everyday word carries no situational signal. The candidate term itself
    never appears in its own context. When disabled, the threat-only
    context is returned unchanged.
    """
    context = set(candidate.context_terms)
    if not enabled:
        return context
    technical = chain.technical_terms()
    ordinary = chain.language_terms()
    post_tokens = {post.id: term_set(post.text) for post in batch.posts}
    for post_id in candidate.supporters:
        co_occurring = post_tokens.get(post_id, set()) & technical
        context |= co_occurring - ordinary
    context.discard(candidate.term)
    return context


def apply_context_mode(
    candidates: list[CandidateTerm],
    batch: WindowBatch,
    chain: FilterChain,
    mode: str = CONTEXT_AUGMENTED,
) -> list[CandidateTerm]:
    """Return candidates with context sets resolved for the configured mode."""
    if mode not in CONTEXT_MODES:
        raise ValueError(f"unknown context mode {mode!r}")
    enabled = mode == CONTEXT_AUGMENTED
    return [
        replace(c, context_terms=augmented_context(c, batch, chain, enabled))
        for c in candidates
    ]
