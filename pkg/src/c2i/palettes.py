"""Fixed color tables and skeleton topology for canvas rendering.

All rendering constants live here so golden tests pin a single source.
"""

# BODY-18 keypoint order (OpenPose convention).
POSE_KEYPOINT_NAMES = (
    "nose", "neck",
    "right_shoulder", "right_elbow", "right_wrist",
    "left_shoulder", "left_elbow", "left_wrist",
    "right_hip", "right_knee", "right_ankle",
    "left_hip", "left_knee", "left_ankle",
    "right_eye", "left_eye", "right_ear", "left_ear",
)

# Limb draw order; both endpoints must be visible for a limb to draw.
POSE_LIMBS = (
    (1, 2), (1, 5),               # neck -> shoulders
    (2, 3), (3, 4),               # right arm
    (5, 6), (6, 7),               # left arm
    (1, 8), (8, 9), (9, 10),      # right leg
    (1, 11), (11, 12), (12, 13),  # left leg
    (1, 0),                       # neck -> nose
    (0, 14), (14, 16),            # nose -> right eye -> right ear
    (0, 15), (15, 17),            # nose -> left eye -> left ear
)

# 18-entry hue wheel; limb i uses POSE_PALETTE[i], keypoint j uses POSE_PALETTE[j].
POSE_PALETTE = (
    (255, 0, 0), (255, 85, 0), (255, 170, 0), (255, 255, 0),
    (170, 255, 0), (85, 255, 0), (0, 255, 0), (0, 255, 85),
    (0, 255, 170), (0, 255, 255), (0, 170, 255), (0, 85, 255),
    (0, 0, 255), (85, 0, 255), (170, 0, 255), (255, 0, 255),
    (255, 0, 170), (255, 0, 85),
)

# 8-entry cycle for box strokes and label tags.
BOX_PALETTE = (
    (230, 25, 75), (60, 180, 75), (0, 130, 200), (245, 130, 48),
    (145, 30, 180), (128, 128, 0), (70, 140, 140), (170, 110, 40),
)

# Masked-background fill value.
MASK_FILL = (128, 128, 128)
