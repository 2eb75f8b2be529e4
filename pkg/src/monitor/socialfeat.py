"""Social-context features from the author profile and engagement counts."""
from __future__ import annotations

from dataclasses import asdict, dataclass

from .corpus import Post


@dataclass(frozen=True)
class SocialFeatures:
    n_followers: int
    n_friends: int
    n_tweets: int
    n_favorites: int
    times_listed: int
    friends_followers_ratio: float
    n_retweets: int
    n_likes: int
    has_url: int
    has_profile_image: int
    verified: int

    def as_dict(self) -> dict:
        return asdict(self)


SOCIAL_FEATURE_NAMES = tuple(SocialFeatures.__dataclass_fields__)


def extract_social_features(p: Post) -> SocialFeatures:
    u = p.user
    return SocialFeatures(
        n_followers=u.followers,
        n_friends=u.friends,
        n_tweets=u.statuses_posted,
        n_favorites=u.favourites,
        times_listed=u.times_listed,
        # zero followers: the denominator is floored at 1 so the ratio stays finite
        friends_followers_ratio=u.friends / max(u.followers, 1),
        n_retweets=p.retweets,
        n_likes=p.likes,
        has_url=int(u.has_homepage_url),
        has_profile_image=int(u.has_profile_image),
        verified=int(u.verified),
    )
