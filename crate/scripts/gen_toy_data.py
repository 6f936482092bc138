#!/usr/bin/env python3
"""Regenerates the bundled toy corpus (deterministic, stdlib only).

Outputs, relative to the repository root:
  data/corpus/<profile>/<utt>.wav        synthetic 16 kHz PCM16 audio
  data/corpus/<profile>/<utt>.TextGrid   word/phone alignment for the audio
  data/transcripts/recording_script.txt  transcript corpus for coverage stats

The audio corpus uses pseudo-words: each is phonemically identical to one
command-catalog word but carries a scrambled label, so diphone coverage is
complete while whole-word units never match real command words. Profile p288
additionally records a few real-labeled words to exercise word-unit reuse.

The recording script introduces vocabulary in three stages so that coverage
of the attack-command diphone set grows gradually: common conversational
words first, most command words in the middle, and rare command words (slot
values, long nouns) only near the end.
"""

import math
import random
import struct
import wave
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
LEXICON_PATH = ROOT / "crates" / "core" / "data" / "lexicon.dict"
CORPUS_DIR = ROOT / "data" / "corpus"
TRANSCRIPTS_DIR = ROOT / "data" / "transcripts"

SAMPLE_RATE = 16000
SEED = 20260816

# Speaker profiles: (name, base sine frequency in Hz).
PROFILES = [("p236", 190), ("p288", 230), ("p360", 95)]

# Words whose phone sequences the audio corpus must cover (all catalog words
# plus "again" for free-text demos).
COMMAND_WORDS = [
    "a", "account", "add", "again", "alexa", "appointment", "ask", "balance",
    "bananas", "bank", "call", "car", "cart", "checking", "chevrolet",
    "dentist's", "for", "is", "jazz", "light", "list", "make", "milk", "most",
    "music", "my", "name", "off", "outside", "payment", "phone", "play",
    "recent", "shopping", "some", "temperature", "the", "to", "transactions",
    "turn", "unlock", "what", "what's", "when",
]

# Real-labeled extra recordings for p288 (word-unit donor material).
REAL_WORD_UTTERANCES = [
    ["alexa", "play", "music"],
    ["my", "name", "again"],
    ["alexa", "my", "name"],
    ["play", "music", "again"],
]

INSTANCES_PER_WORD = 3
WORDS_PER_UTTERANCE = (4, 7)

# Recording-script stages: (line count, {word: weight}). Later stages also
# keep earlier vocabulary in circulation at reduced weight.
STAGE1_WORDS = {
    "what": 12, "is": 14, "my": 14, "name": 11, "was": 10, "it": 10, "in": 8,
    "not": 8, "now": 8, "never": 4, "new": 5, "night": 5, "might": 5, "by": 6,
    "why": 5, "time": 8, "home": 6, "came": 5, "same": 5, "from": 8,
    "them": 6, "of": 12, "up": 8, "out": 6, "get": 6, "want": 6, "that": 8,
    "at": 6, "most": 5, "make": 6, "say": 6, "may": 4, "day": 6, "good": 5,
    "we": 10, "see": 6, "know": 6, "no": 5, "but": 8, "has": 5, "more": 6,
    "i": 8, "you": 8, "this": 6, "with": 6, "have": 5, "had": 4, "he": 4,
    "she": 4, "they": 5, "how": 4, "who": 3, "will": 4, "so": 4, "on": 4,
    "to": 6, "do": 4,
}
STAGE2_WORDS = {
    "call": 5, "phone": 5, "play": 5, "add": 4, "cart": 3, "when": 5,
    "ask": 4, "bank": 4, "account": 3, "balance": 3, "payment": 3, "for": 6,
    "car": 4, "turn": 4, "off": 4, "light": 4, "milk": 3, "list": 3,
    "unlock": 3, "outside": 3, "water": 5, "morning": 4, "door": 4,
    "room": 4, "work": 5, "help": 4, "talk": 4, "run": 4, "give": 4,
    "tell": 4, "find": 4, "keep": 4, "look": 4, "think": 4, "thank": 3,
    "week": 4, "year": 4, "start": 4, "place": 3, "friend": 3, "seven": 3,
    "paper": 3, "number": 3, "window": 3, "winter": 3, "dinner": 3,
    "answer": 3, "minute": 3, "hour": 3, "today": 4, "please": 3,
    "welcome": 3, "again": 4, "like": 4, "just": 4, "over": 3, "own": 3,
    "only": 3, "other": 3, "after": 3, "about": 4, "down": 3, "then": 3,
    "there": 4, "where": 3, "here": 4, "feel": 3, "go": 4, "going": 3,
    "come": 4, "move": 3, "live": 3, "use": 3, "put": 3, "said": 3, "saw": 3,
    "leave": 3, "these": 3, "those": 3, "than": 3, "begin": 2, "been": 3,
    "be": 4, "are": 4, "an": 2, "and": 5, "any": 3, "each": 3, "big": 3,
    "yes": 3, "very": 3, "must": 3, "should": 3, "would": 3, "could": 3,
    "can": 4, "did": 3, "does": 3, "if": 4, "or": 3, "all": 4, "long": 3,
    "often": 2, "evening": 2, "mother": 3, "father": 3, "garden": 2,
    "house": 4, "food": 3, "school": 3, "street": 2, "city": 3, "story": 2,
    "side": 3, "month": 3, "country": 2, "child": 2, "hand": 3, "great": 3,
    "question": 2, "nature": 2, "too": 3,
}
STAGE3_WORDS = {
    "jazz": 2, "some": 3, "bananas": 2, "dentist's": 2, "appointment": 2,
    "checking": 2, "transactions": 2, "chevrolet": 2, "temperature": 2,
    "shopping": 2, "music": 3, "what's": 3, "recent": 2, "six": 2, "idea": 2,
    "soda": 2, "sofa": 2, "tomorrow": 2,
}
STAGES = [
    (30, [(STAGE1_WORDS, 1.0)]),
    (110, [(STAGE1_WORDS, 0.4), (STAGE2_WORDS, 1.0)]),
    (140, [(STAGE1_WORDS, 0.3), (STAGE2_WORDS, 0.5), (STAGE3_WORDS, 1.0)]),
]


def load_lexicon():
    lexicon = {}
    for line in LEXICON_PATH.read_text().splitlines():
        if not line.strip() or line.startswith(";;;"):
            continue
        parts = line.split()
        lexicon[parts[0].lower()] = parts[1:]
    return lexicon


def scramble(word):
    """Deterministic pseudo-word label: ROT13 over ASCII letters."""
    out = []
    for ch in word:
        if "a" <= ch <= "z":
            out.append(chr((ord(ch) - ord("a") + 13) % 26 + ord("a")))
        else:
            out.append(ch)
    return "".join(out)


PHONE_ORDER = [
    "AA", "AE", "AH", "AO", "AW", "AY", "B", "CH", "D", "DH", "EH", "ER",
    "EY", "F", "G", "HH", "IH", "IY", "JH", "K", "L", "M", "N", "NG", "OW",
    "OY", "P", "R", "S", "SH", "T", "TH", "UH", "UW", "V", "W", "Y", "Z",
    "ZH",
]


def phone_frequency(raw_phone, base):
    bare = raw_phone.rstrip("012")
    return base + 22 * PHONE_ORDER.index(bare)


def render_samples(intervals, base):
    """One sine tone per phone interval; silence for pauses."""
    samples = []
    for raw_phone, duration_ms in intervals:
        count = duration_ms * SAMPLE_RATE // 1000
        if raw_phone == "sil":
            samples.extend([0] * count)
            continue
        freq = phone_frequency(raw_phone, base)
        step = 2.0 * math.pi * freq / SAMPLE_RATE
        samples.extend(int(9000 * math.sin(step * k)) for k in range(count))
    return samples


def write_wav(path, samples):
    with wave.open(str(path), "wb") as out:
        out.setnchannels(1)
        out.setsampwidth(2)
        out.setframerate(SAMPLE_RATE)
        out.writeframes(struct.pack(f"<{len(samples)}h", *samples))


def fmt(seconds):
    text = repr(round(seconds, 6))
    return text[:-2] if text.endswith(".0") else text


def write_textgrid(path, duration, word_tier, phone_tier):
    lines = [
        'File type = "ooTextFile"',
        'Object class = "TextGrid"',
        "",
        "xmin = 0",
        f"xmax = {fmt(duration)}",
        "tiers? <exists>",
        "size = 2",
        "item []:",
    ]
    for index, (name, intervals) in enumerate(
        [("words", word_tier), ("phones", phone_tier)], start=1
    ):
        lines += [
            f"    item [{index}]:",
            '        class = "IntervalTier"',
            f'        name = "{name}"',
            "        xmin = 0",
            f"        xmax = {fmt(duration)}",
            f"        intervals: size = {len(intervals)}",
        ]
        for position, (start, end, label) in enumerate(intervals, start=1):
            lines += [
                f"        intervals [{position}]:",
                f"            xmin = {fmt(start)}",
                f"            xmax = {fmt(end)}",
                f'            text = "{label}"',
            ]
    path.write_text("\n".join(lines) + "\n")


def build_utterance(words, labels, lexicon, rng, base):
    """Lays out sil word sil word ... sil with integer-millisecond phones."""
    phone_tier = []
    word_tier = []
    render_plan = []
    cursor_ms = 0

    def add_pause():
        nonlocal cursor_ms
        duration = rng.randrange(60, 121)
        start, end = cursor_ms, cursor_ms + duration
        phone_tier.append((start / 1000, end / 1000, "sil"))
        word_tier.append((start / 1000, end / 1000, ""))
        render_plan.append(("sil", duration))
        cursor_ms = end

    add_pause()
    for word, label in zip(words, labels):
        word_start = cursor_ms
        for raw_phone in lexicon[word]:
            duration = rng.randrange(50, 121)
            start, end = cursor_ms, cursor_ms + duration
            phone_tier.append((start / 1000, end / 1000, raw_phone))
            render_plan.append((raw_phone, duration))
            cursor_ms = end
        word_tier.append((word_start / 1000, cursor_ms / 1000, label))
        add_pause()

    duration = cursor_ms / 1000
    samples = render_samples(render_plan, base)
    return duration, word_tier, phone_tier, samples


def generate_audio_corpus(lexicon):
    for profile, base in PROFILES:
        profile_dir = CORPUS_DIR / profile
        profile_dir.mkdir(parents=True, exist_ok=True)
        rng = random.Random(f"{SEED}/{profile}")

        slots = COMMAND_WORDS * INSTANCES_PER_WORD
        rng.shuffle(slots)

        utterances = []
        while slots:
            take = min(len(slots), rng.randrange(*WORDS_PER_UTTERANCE))
            chunk = slots[:take]
            slots = slots[take:]
            utterances.append((chunk, [scramble(w) for w in chunk]))
        if profile == "p288":
            for words in REAL_WORD_UTTERANCES:
                utterances.append((words, list(words)))

        for index, (words, labels) in enumerate(utterances, start=1):
            stem = f"{profile}_{index:03d}"
            duration, word_tier, phone_tier, samples = build_utterance(
                words, labels, lexicon, rng, base
            )
            write_wav(profile_dir / f"{stem}.wav", samples)
            write_textgrid(
                profile_dir / f"{stem}.TextGrid", duration, word_tier, phone_tier
            )
        print(f"{profile}: {len(utterances)} utterances")


def weighted_vocab(stage_specs):
    vocab = {}
    for words, scale in stage_specs:
        for word, weight in words.items():
            vocab[word] = vocab.get(word, 0.0) + weight * scale
    return sorted(vocab.items())


def generate_recording_script(lexicon):
    TRANSCRIPTS_DIR.mkdir(parents=True, exist_ok=True)
    rng = random.Random(f"{SEED}/script")
    lines = []
    for line_count, stage_specs in STAGES:
        vocab = weighted_vocab(stage_specs)
        words = [w for w, _ in vocab]
        weights = [weight for _, weight in vocab]
        missing = [w for w in words if w not in lexicon]
        if missing:
            raise SystemExit(f"words missing from lexicon: {missing}")
        for _ in range(line_count):
            length = rng.randrange(8, 12)
            line = []
            while len(line) < length:
                word = rng.choices(words, weights)[0]
                if line and line[-1] == word:
                    continue
                line.append(word)
            lines.append(" ".join(line))
    (TRANSCRIPTS_DIR / "recording_script.txt").write_text("\n".join(lines) + "\n")
    print(f"recording script: {len(lines)} lines")


def main():
    lexicon = load_lexicon()
    for word in COMMAND_WORDS:
        if word not in lexicon:
            raise SystemExit(f"command word missing from lexicon: {word}")
    generate_audio_corpus(lexicon)
    generate_recording_script(lexicon)


if __name__ == "__main__":
    main()
