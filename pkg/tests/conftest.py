import json
from datetime import datetime, timedelta, timezone

import pytest

from threatwarn.filters import FilterChain
from threatwarn.ingest import (
    Dictionary,
    DictionaryRole,
    ExpertList,
    Source,
    SourcePost,
    WindowBatch,
    post_to_record,
)

MIRAI_TWEET = (
    "My interview to @MalwareMustDie for @SecurityAffairs on a new Botnet "
    "targeting #IoT. Details on #Mirai trojan #Linux https://t.co/x"
)

MIRAI_TWEET_NORMALIZED = (
    "my interview to for on a new botnet targeting iot details on mirai trojan linux"
)


def ts(year, month, day, hour=0, minute=0, second=0):
    return datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc)


def make_post(
    post_id,
    text,
    when,
    source=Source.EXPERT_FEED,
    author="expert1",
    site=None,
    author_reputation=None,
):
    return SourcePost(
        id=post_id,
        source=source,
        author=author,
        timestamp=when,
        text=text,
        site=site,
        author_reputation=author_reputation,
    )


def make_dictionary(name, role, terms):
    return Dictionary(name=name, role=role, terms=frozenset(terms))


def write_posts_file(path, posts):
    with open(path, "w", encoding="utf-8") as handle:
        for post in posts:
            handle.write(json.dumps(post_to_record(post)) + "\n")
    return path


def retweet_burst(text, start, count, id_prefix="rt"):
    """``count`` identical expert retweets, one minute apart, authors cycling."""
    return [
        make_post(
            f"{id_prefix}{i}",
            text,
            start + timedelta(minutes=i),
            author=f"expert{i % 9 + 1}",
        )
        for i in range(count)
    ]


# "targeting" is an ordinary English word as well as expert jargon; any real
# common-words list contains it.
GOLDEN_DICTIONARY_TERMS = {
    "english": {"my", "interview", "to", "for", "on", "a", "new", "details", "targeting"},
    "stopwords": {"the", "and", "of"},
    "technical": {"targeting", "linux", "iot", "trojan"},
    "threat": {"botnet", "ddos", "phishing", "databreach"},
    "italian": {"intervista", "attacco", "spazio"},
}

GOLDEN_DICTIONARY_ROLES = {
    "english": DictionaryRole.COMMON_LANGUAGE,
    "stopwords": DictionaryRole.STOPWORD,
    "technical": DictionaryRole.TECHNICAL,
    "threat": DictionaryRole.THREAT,
    "italian": DictionaryRole.FOREIGN_LANGUAGE,
}


def build_golden_chain():
    dictionaries = {
        name: make_dictionary(name, GOLDEN_DICTIONARY_ROLES[name], terms)
        for name, terms in GOLDEN_DICTIONARY_TERMS.items()
    }
    return FilterChain(
        exclusion_dictionaries=(
            dictionaries["english"],
            dictionaries["stopwords"],
            dictionaries["technical"],
            dictionaries["italian"],
        ),
        threat_dictionary=dictionaries["threat"],
    )


def build_experts():
    return ExpertList(handles=frozenset(f"expert{i}" for i in range(1, 10)))


def write_dictionary_files(directory):
    """Write the golden dictionaries to disk; returns role-name -> path."""
    paths = {}
    for name, terms in GOLDEN_DICTIONARY_TERMS.items():
        path = directory / f"{name}.txt"
        path.write_text("\n".join(sorted(terms)) + "\n", encoding="utf-8")
        paths[name] = path
    return paths


@pytest.fixture
def english_dict():
    return make_dictionary(
        "english", DictionaryRole.COMMON_LANGUAGE, GOLDEN_DICTIONARY_TERMS["english"]
    )


@pytest.fixture
def threat_dict():
    return make_dictionary("threat", DictionaryRole.THREAT, GOLDEN_DICTIONARY_TERMS["threat"])


@pytest.fixture
def golden_chain():
    return build_golden_chain()


@pytest.fixture
def experts():
    return build_experts()


@pytest.fixture
def mirai_window():
    """The worked example: seven identical retweets inside one hour window."""
    start = ts(2016, 9, 5, 8)
    posts = retweet_burst(MIRAI_TWEET, start + timedelta(minutes=5), 7)
    return WindowBatch(window_start=start, posts=posts)


def build_mirai_history_store():
    """A synthetic warning history matching the headline mirai totals:
    94 warnings, 537 tweet mentions, peak cumulative darkweb count 85.

    Two frequency-7 warnings on the Sep 5 morning, then one warning per day;
    darkweb counts stay zero until Oct 1 and then climb to 85.
    """
    from threatwarn.alerts import ThreatWarning, WarningStore, warning_id

    def warning(generated_at, frequency, darkweb):
        return ThreatWarning(
            id=warning_id("mirai", generated_at - timedelta(hours=1)),
            generated_at=generated_at,
            term="mirai",
            twitter_frequency=frequency,
            darkweb_frequency=darkweb,
            darkweb_posts=(),
            context_terms=frozenset({"botnet", "iot"}),
        )

    store = WarningStore()
    store.append(warning(ts(2016, 9, 5, 8), 7, 0))
    store.append(warning(ts(2016, 9, 5, 9), 7, 0))
    darkweb_seen = 0
    for day in range(92):
        generated_at = ts(2016, 9, 6, 10) + timedelta(days=day)
        frequency = 6 if day < 63 else 5
        if generated_at >= ts(2016, 10, 1):
            darkweb_seen = min(85, darkweb_seen + 2)
        store.append(warning(generated_at, frequency, darkweb_seen))
    assert len(store) == 94
    assert sum(w.twitter_frequency for w in store) == 537
    assert max(w.darkweb_frequency for w in store) == 85
    return store


def build_mirai_scenario():
    """Feed and corpus reconstructing the Mirai timeline on fixture data.

    Expert bursts: seven retweets in each of the 07:00 and 08:00 windows of
    Sep 5, then a two-post burst on Oct 1 after the darkweb corpus first
    mentions the term (Sep 30 18:00). A non-expert copy of the tweet checks
    that the curated-list restriction holds. Returns (feed, corpus).
    """
    feed = []
    feed += retweet_burst(MIRAI_TWEET, ts(2016, 9, 5, 7, 5), 7, id_prefix="early")
    feed += retweet_burst(MIRAI_TWEET, ts(2016, 9, 5, 8, 5), 7, id_prefix="late")
    feed.append(make_post("noise1", MIRAI_TWEET, ts(2016, 9, 5, 7, 30), author="rando"))
    feed += retweet_burst(
        "New details on mirai botnet", ts(2016, 10, 1, 7, 5), 2, id_prefix="oct"
    )

    corpus = [
        make_post(
            "dw1",
            "mirai botnet source code released",
            ts(2016, 9, 30, 18),
            source=Source.DARKWEB,
            author="anna-senpai",
            site="hackforum",
        ),
        make_post(
            "dw2",
            "selling mirai setup help",
            ts(2016, 10, 10, 3),
            source=Source.DEEPWEB,
            author="broker",
            site="market",
        ),
        make_post(
            "dw3",
            "unrelated dump thread",
            ts(2016, 9, 1, 0),
            source=Source.DARKWEB,
            author="lurker",
            site="hackforum",
        ),
    ]
    return feed, corpus


#: Per-annotator legitimate counts over the 661-warning evaluation run.
ANNOTATOR_LEGIT_COUNTS = {"a1": 540, "a2": 532, "a3": 565, "a4": 534, "a5": 578}
EVALUATED_WARNINGS = 661
MAJORITY_LEGIT_ROWS = 555  # 555/661 = 0.8396, the "about 84%" majority rate


def build_annotation_matrix():
    """A full 661x5 annotation matrix hitting the reference marginals.

    Row plan: 555 rows pass the 3-of-5 majority (317 rows with five
    legitimate votes, 238 with four) and 106 rows fall short with two.
    Row vote totals: 317*5 + 238*4 + 106*2 = 2749 = sum of the column
    targets. Columns are assigned greedily to whichever annotators have the
    most budget left, which realizes the degree sequence exactly.
    """
    from threatwarn.evaluation import FALSE_ALARM, LEGITIMATE, AnnotationMatrix

    annotators = list(ANNOTATOR_LEGIT_COUNTS)
    budgets = dict(ANNOTATOR_LEGIT_COUNTS)
    row_sizes = [5] * 317 + [4] * 238 + [2] * 106
    assert len(row_sizes) == EVALUATED_WARNINGS
    assert sum(row_sizes) == sum(budgets.values())

    labels = {}
    for row, size in enumerate(row_sizes):
        wid = f"w{row:03d}"
        ranked = sorted(annotators, key=lambda a: (-budgets[a], a))
        voters = ranked[:size]
        for annotator in annotators:
            if annotator in voters:
                budgets[annotator] -= 1
                labels[(wid, annotator)] = LEGITIMATE
            else:
                labels[(wid, annotator)] = FALSE_ALARM
    assert all(budget == 0 for budget in budgets.values()), budgets
    return AnnotationMatrix.from_labels(labels)
