"""Hidden-state chain model for whole-sequence classification.

A sequence of observation vectors is scored jointly with a latent state
sequence and a single output label.  The unnormalized log-score of a
configuration ``(y, h, x)`` is

    score(y, h, x) = sum_j <x_j, W_obs[h_j]>
                   + sum_j W_state[y, h_j]
                   + sum_{j<L} W_trans[y, h_j, h_{j+1}]

and the label posterior marginalizes the latent states per label.  All
inference runs in log-space; sequences of hundreds of segments would
underflow a probability-space forward pass.

Conventions fixed here and relied on elsewhere:

* the transition sum ranges over the L-1 adjacent pairs, so a length-1
  sequence has no transition term;
* no begin/end boundary states and no bias feature are added;
* ``predict`` breaks exact posterior ties toward the lowest label index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import EnumerationBudgetError, InvalidInputError

BRUTE_FORCE_MAX_PATHS = 10**6


@dataclass(frozen=True)
class LabelSet:
    """Registered label names; the label itself is an index into ``names``."""

    names: tuple[str, ...] = ("negative", "positive")

    def __post_init__(self):
        if len(self.names) < 2:
            raise InvalidInputError("a label set needs at least two labels")
        if len(set(self.names)) != len(self.names):
            raise InvalidInputError(f"duplicate label names: {self.names}")

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InvalidInputError(f"unknown label name {name!r}") from None


@dataclass(frozen=True)
class ObservationSequence:
    """One document: an ordered (L, D) matrix of per-segment feature vectors.

    L >= 1 and every entry must be finite; both are checked at construction,
    so an empty sequence can never reach the inference routines.
    """

    doc_id: str
    features: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2:
            raise InvalidInputError(
                f"{self.doc_id}: features must be 2-D (L, D), got shape {feats.shape}"
            )
        if feats.shape[0] < 1:
            raise InvalidInputError(f"{self.doc_id}: a sequence needs at least one segment")
        if not np.isfinite(feats).all():
            raise InvalidInputError(f"{self.doc_id}: non-finite feature values")
        object.__setattr__(self, "features", feats)

    @property
    def length(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass
class HcrfParameters:
    """Model weights: observation, label-state, and label-transition blocks.

    Shapes: ``theta_obs`` is (H, D), ``theta_state`` is (Y, H) and
    ``theta_trans`` is (Y, H, H); all entries must be finite.
    """

    theta_obs: np.ndarray
    theta_state: np.ndarray
    theta_trans: np.ndarray

    def __post_init__(self):
        self.theta_obs = np.asarray(self.theta_obs, dtype=np.float64)
        self.theta_state = np.asarray(self.theta_state, dtype=np.float64)
        self.theta_trans = np.asarray(self.theta_trans, dtype=np.float64)
        if self.theta_obs.ndim != 2 or self.theta_state.ndim != 2 or self.theta_trans.ndim != 3:
            raise InvalidInputError("parameter blocks have wrong rank")
        h, _ = self.theta_obs.shape
        y, h2 = self.theta_state.shape
        if h2 != h or self.theta_trans.shape != (y, h, h):
            raise InvalidInputError(
                "inconsistent parameter shapes: "
                f"obs {self.theta_obs.shape}, state {self.theta_state.shape}, "
                f"trans {self.theta_trans.shape}"
            )
        if h < 1 or y < 2:
            raise InvalidInputError("need at least 1 hidden state and 2 labels")
        for block in (self.theta_obs, self.theta_state, self.theta_trans):
            if not np.isfinite(block).all():
                raise InvalidInputError("non-finite parameter values")

    @property
    def num_hidden_states(self) -> int:
        return self.theta_obs.shape[0]

    @property
    def num_labels(self) -> int:
        return self.theta_state.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.theta_obs.shape[1]

    @classmethod
    def zeros(cls, num_hidden_states: int, num_labels: int, feature_dim: int) -> "HcrfParameters":
        h, y, d = num_hidden_states, num_labels, feature_dim
        return cls(np.zeros((h, d)), np.zeros((y, h)), np.zeros((y, h, h)))

    @classmethod
    def random(
        cls,
        num_hidden_states: int,
        num_labels: int,
        feature_dim: int,
        rng: np.random.Generator,
        scale: float = 0.01,
    ) -> "HcrfParameters":
        """Small symmetric-uniform init; all-zero is a saddle of the
        hidden-state exchange symmetry, so training starts here."""
        h, y, d = num_hidden_states, num_labels, feature_dim
        return cls(
            rng.uniform(-scale, scale, size=(h, d)),
            rng.uniform(-scale, scale, size=(y, h)),
            rng.uniform(-scale, scale, size=(y, h, h)),
        )

    def as_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.theta_obs.ravel(), self.theta_state.ravel(), self.theta_trans.ravel()]
        )

    @classmethod
    def from_vector(
        cls, vec: np.ndarray, num_hidden_states: int, num_labels: int, feature_dim: int
    ) -> "HcrfParameters":
        h, y, d = num_hidden_states, num_labels, feature_dim
        sizes = (h * d, y * h, y * h * h)
        if vec.shape != (sum(sizes),):
            raise InvalidInputError(f"vector length {vec.shape} does not match ({h},{y},{d})")
        a, b = sizes[0], sizes[0] + sizes[1]
        return cls(
            vec[:a].reshape(h, d),
            vec[a:b].reshape(y, h),
            vec[b:].reshape(y, h, h),
        )

    def copy(self) -> "HcrfParameters":
        return HcrfParameters(
            self.theta_obs.copy(), self.theta_state.copy(), self.theta_trans.copy()
        )


@dataclass(frozen=True)
class Marginals:
    """Latent-state posteriors given one label: P(h_j | y, x) per position
    and P(h_j, h_{j+1} | y, x) per adjacent pair."""

    state_posteriors: np.ndarray  # (L, H)
    pair_posteriors: np.ndarray  # (L-1, H, H)


def _check_dims(x: ObservationSequence, theta: HcrfParameters):
    if x.dim != theta.feature_dim:
        raise InvalidInputError(
            f"{x.doc_id}: feature dim {x.dim} != model dim {theta.feature_dim}"
        )


def _check_label(y: int, theta: HcrfParameters):
    if not 0 <= y < theta.num_labels:
        raise InvalidInputError(f"label index {y} out of range [0, {theta.num_labels})")


def _emission_scores(x: ObservationSequence, theta: HcrfParameters) -> np.ndarray:
    """(L, H) matrix of <x_j, W_obs[h]> inner products."""
    return x.features @ theta.theta_obs.T


def potential(
    y: int, hidden_states, x: ObservationSequence, theta: HcrfParameters
) -> float:
    """Unnormalized log-score of one (label, latent path, observations) triple."""
    _check_dims(x, theta)
    _check_label(y, theta)
    h_seq = np.asarray(hidden_states, dtype=np.intp)
    if h_seq.shape != (x.length,):
        raise InvalidInputError(
            f"hidden path length {h_seq.shape} does not match sequence length {x.length}"
        )
    if h_seq.min() < 0 or h_seq.max() >= theta.num_hidden_states:
        raise InvalidInputError("hidden state index out of range")
    emis = _emission_scores(x, theta)
    score = emis[np.arange(x.length), h_seq].sum()
    score += theta.theta_state[y, h_seq].sum()
    if x.length > 1:
        score += theta.theta_trans[y, h_seq[:-1], h_seq[1:]].sum()
    return float(score)


def _forward(node_scores: np.ndarray, trans: np.ndarray) -> np.ndarray:
    """Log-space forward pass.  node_scores is (L, H) = emission + state
    terms, trans is (H, H); returns alpha (L, H)."""
    length = node_scores.shape[0]
    alpha = np.empty_like(node_scores)
    alpha[0] = node_scores[0]
    for j in range(1, length):
        alpha[j] = logsumexp(alpha[j - 1][:, None] + trans, axis=0) + node_scores[j]
    return alpha


def _backward(node_scores: np.ndarray, trans: np.ndarray) -> np.ndarray:
    length = node_scores.shape[0]
    beta = np.zeros_like(node_scores)
    for j in range(length - 2, -1, -1):
        beta[j] = logsumexp(trans + (node_scores[j + 1] + beta[j + 1])[None, :], axis=1)
    return beta


def log_partition_per_label(y: int, x: ObservationSequence, theta: HcrfParameters) -> float:
    """log sum over all latent paths of exp(score(y, h, x)); O(L * H^2)."""
    _check_dims(x, theta)
    _check_label(y, theta)
    node = _emission_scores(x, theta) + theta.theta_state[y][None, :]
    alpha = _forward(node, theta.theta_trans[y])
    return float(logsumexp(alpha[-1]))


def log_partitions(x: ObservationSequence, theta: HcrfParameters) -> np.ndarray:
    """Per-label log-partitions as a (Y,) vector."""
    _check_dims(x, theta)
    return np.array(
        [log_partition_per_label(y, x, theta) for y in range(theta.num_labels)]
    )


def posterior(x: ObservationSequence, theta: HcrfParameters) -> np.ndarray:
    """Label posterior P(y | x); a (Y,) probability vector summing to 1."""
    log_z = log_partitions(x, theta)
    return np.exp(log_z - logsumexp(log_z))


def predict(x: ObservationSequence, theta: HcrfParameters) -> int:
    """argmax_y P(y | x); exact ties go to the lowest label index."""
    return int(np.argmax(posterior(x, theta)))


def marginals(y: int, x: ObservationSequence, theta: HcrfParameters) -> Marginals:
    """Forward-backward latent-state posteriors conditioned on label ``y``.

    Needed by the likelihood gradient: the expected feature counts are
    sums of these state and pair posteriors.
    """
    _check_dims(x, theta)
    _check_label(y, theta)
    trans = theta.theta_trans[y]
    node = _emission_scores(x, theta) + theta.theta_state[y][None, :]
    alpha = _forward(node, trans)
    beta = _backward(node, trans)
    log_z = logsumexp(alpha[-1])

    state = np.exp(alpha + beta - log_z)
    length = x.length
    pair = np.empty((length - 1, theta.num_hidden_states, theta.num_hidden_states))
    for j in range(length - 1):
        log_pair = (
            alpha[j][:, None] + trans + (node[j + 1] + beta[j + 1])[None, :] - log_z
        )
        pair[j] = np.exp(log_pair)
    return Marginals(state_posteriors=state, pair_posteriors=pair)


def _enumerate_paths(num_states: int, length: int) -> np.ndarray:
    """All ``num_states**length`` latent paths as a (P, L) index matrix."""
    grids = np.meshgrid(*([np.arange(num_states)] * length), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def brute_force_log_partitions(x: ObservationSequence, theta: HcrfParameters) -> np.ndarray:
    """Per-label log-partitions by explicit path enumeration (test oracle)."""
    _check_dims(x, theta)
    num_paths = theta.num_hidden_states**x.length
    if num_paths > BRUTE_FORCE_MAX_PATHS:
        raise EnumerationBudgetError(
            f"{theta.num_hidden_states}^{x.length} = {num_paths} paths exceeds "
            f"the enumeration budget of {BRUTE_FORCE_MAX_PATHS}"
        )
    paths = _enumerate_paths(theta.num_hidden_states, x.length)
    emis = _emission_scores(x, theta)
    obs_scores = emis[np.arange(x.length)[None, :], paths].sum(axis=1)
    log_z = np.empty(theta.num_labels)
    for y in range(theta.num_labels):
        scores = obs_scores + theta.theta_state[y][paths].sum(axis=1)
        if x.length > 1:
            scores = scores + theta.theta_trans[y][paths[:, :-1], paths[:, 1:]].sum(axis=1)
        log_z[y] = logsumexp(scores)
    return log_z


def brute_force_posterior(x: ObservationSequence, theta: HcrfParameters) -> np.ndarray:
    """Same semantics as :func:`posterior`, via explicit enumeration.

    Refuses when ``H**L`` exceeds ``BRUTE_FORCE_MAX_PATHS``.
    """
    log_z = brute_force_log_partitions(x, theta)
    return np.exp(log_z - logsumexp(log_z))
