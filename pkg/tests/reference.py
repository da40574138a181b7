"""Pixel-by-pixel reference implementations of the fusion methods, written
with plain loops and independently of tempseg.fusion"""


def argmax(values):
    best = 0
    for index, value in enumerate(values):
        if value > values[best]:
            best = index
    return best


def reference_image_buffer(label_frames, buffer_size, targets):
    """label_frames: list of H x W nested lists, oldest first"""
    outputs = []
    for t, present in enumerate(label_frames):
        height, width = len(present), len(present[0])
        fused = [[present[row][col] for col in range(width)] for row in range(height)]
        for row in range(height):
            for col in range(width):
                for age in range(min(buffer_size, t + 1)):
                    label = label_frames[t - age][row][col]
                    if label in targets:
                        fused[row][col] = label
                        break
        outputs.append(fused)
    return outputs


def reference_attention(prob_frames, weights, threshold, targets):
    """prob_frames: list of H x W x C nested lists of probabilities, oldest first"""
    outputs = []
    for t, present in enumerate(prob_frames):
        height, width, channels = len(present), len(present[0]), len(present[0][0])
        labels = []
        for row in range(height):
            labels.append([])
            for col in range(width):
                scores = []
                for channel in range(channels):
                    if channel not in targets:
                        scores.append(present[row][col][channel])
                        continue
                    total = 0.0
                    for age in range(min(len(weights), t + 1)):
                        total += weights[age] * prob_frames[t - age][row][col][channel]
                    scores.append(total if total >= threshold else 0.0)
                labels[-1].append(argmax(scores))
        outputs.append(labels)
    return outputs
