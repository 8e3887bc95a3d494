class TopicModelError(Exception):
    pass


class InvalidTopicArgument(TopicModelError, ValueError):
    pass


class InternalConsistencyError(TopicModelError):
    """Count matrices disagree with the token assignments"""


class TopicModelFormatError(TopicModelError):
    pass
