from config.exceptions import GlowVCError


class NonFiniteLoss(GlowVCError):
    """The loss or a gradient became NaN or infinite."""

    def __init__(self, step: int, message: str = ''):
        self.step = step
        super().__init__(message or f'non-finite loss at step {step}')
