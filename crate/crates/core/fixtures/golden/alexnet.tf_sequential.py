# Generated by nnport 0.1.0: pt/subclassing -> tf/sequential, pivot sha256 2cb77cacedfa626f568132aa40a7230abb40182bb8f3a8217cb3d99f4c0f4ba9
import tensorflow as tf
from tensorflow import keras
from tensorflow.keras import layers

DATASETS = {
    "cifar10": ("data/cifar10", "classification", "images"),
    "svhn": ("data/svhn", "classification", "images"),
}


model = keras.Sequential(
    [
        keras.Input(shape=(32, 32, 3)),
        layers.Conv2D(filters=64, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv1"),
        layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid", name="pool1"),
        layers.Conv2D(filters=192, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv2"),
        layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid", name="pool2"),
        layers.Conv2D(filters=384, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv3"),
        layers.Conv2D(filters=256, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv4"),
        layers.Conv2D(filters=256, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv5"),
        layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid", name="pool3"),
        layers.Flatten(name="flatten"),
        layers.Dropout(rate=0.5, name="drop1"),
        layers.Dense(units=1024, activation="relu", name="fc1"),
        layers.Dropout(rate=0.5, name="drop2"),
        layers.Dense(units=512, activation="relu", name="fc2"),
        layers.Dropout(rate=0.5, name="drop3"),
        layers.Dense(units=10, name="fc3"),
    ],
    name="AlexNet",
)


def train(model, x, y):
    model.compile(
        optimizer=keras.optimizers.Adam(learning_rate=0.001),
        loss=keras.losses.SparseCategoricalCrossentropy(from_logits=True),
        metrics=["accuracy"],
    )
    model.fit(x, y, batch_size=32, epochs=10)
    return model.evaluate(x, y)
